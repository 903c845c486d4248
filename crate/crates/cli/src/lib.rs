//! Command-line front end. `run_cli` parses arguments, runs one subcommand and returns the
//! process exit code: 0 on success, 2 for usage errors (bad flags, unknown methods or
//! parameters), 1 for data or numerical errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use rank_engine::evalproto::{
    self, CurveOptions, PoolOptions, Resampling, Target, DEFAULT_CURVE_DRAWS, DEFAULT_SEED, DEFAULT_SUBSETS,
};
use rank_engine::fixtures;
use rank_engine::io::{self, format_g, Report, TensorFormat};
use rank_engine::registry::{Method, MethodOutput, METHOD_IDS};
use rank_engine::{RankError, ResponseTensor};

const REPORT_COLUMNS: &str = "\
Report columns (CSV, floats with 12 significant digits):
  rank         method,model,score,rank
  rank-all     method,family,model,score,rank
  stability    method,target,mean_tau,std_tau,draws_used,draws_excluded
  convergence  method,target,budget,mean_tau,std_tau,draws_used,draws_excluded
  bootstrap    method,target,pool_size,mean_tau,std_tau,subsets_used,subsets_excluded,draws_excluded
  compare      ranking followed by one column per ranking (Kendall tau-b, `nan` when undefined)

Environment: RANK_ENGINE_THREADS caps the number of worker threads.";

#[derive(Parser, Debug)]
#[command(name = "rank-engine", version, about = "Rank models from repeated-trial outcome tensors", after_help = REPORT_COLUMNS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank with a single method.
    Rank(RankArgs),
    /// Rank with every method in the catalogue.
    RankAll(RankAllArgs),
    /// Single-trial stability against the gold standard or the method itself.
    Stability(StabilityArgs),
    /// Agreement with the full-budget ranking as the trial budget grows.
    Convergence(ConvergenceArgs),
    /// Single-trial stability on bootstrapped model pools.
    Bootstrap(BootstrapArgs),
    /// Kendall tau-b matrix between saved rankings.
    Compare(CompareArgs),
    /// Write a reference tensor.
    Fixtures(FixtureArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Tensor file (JSON or long CSV).
    #[arg(long, short)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<TensorFormat>,
    /// Prior outcomes JSON ({"data": questions x draws}) for bayes_greedy.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Seed for sampling methods and resampling protocols.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MethodArgs {
    #[arg(long, short)]
    method: String,
    /// Method parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
    params: Vec<(String, String)>,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug)]
struct RankAllArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Gold,
    #[value(name = "self")]
    SelfFull,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Gold => Target::Gold,
            TargetArg::SelfFull => Target::SelfFull,
        }
    }
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "gold")]
    target: TargetArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ResampleArg {
    Without,
    With,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Trial budgets per question, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_CURVE_DRAWS)]
    draws: usize,
    #[arg(long, value_enum, default_value = "self")]
    target: TargetArg,
    /// Resample trials without (default) or with replacement.
    #[arg(long, value_enum, default_value = "without")]
    resample: ResampleArg,
}

#[derive(Args, Debug)]
struct BootstrapArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Model pool sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pool_sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SUBSETS)]
    subsets: usize,
    #[arg(long, value_enum, default_value = "gold")]
    target: TargetArg,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Ranking CSVs as written by `rank` or `rank-all`; each method inside a file is one ranking.
    #[arg(required = true)]
    rankings: Vec<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FixtureName {
    FixA,
    FixB,
    FixC,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    #[arg(value_enum)]
    name: FixtureName,
    /// Models (FIX-B only).
    #[arg(long, default_value_t = 3)]
    models: usize,
    /// Questions (FIX-B and FIX-C).
    #[arg(long, default_value_t = 4)]
    questions: usize,
    /// Trials per question; FIX-A is replicated along the trial axis.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: TensorFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<TensorFormat, String> {
    s.parse().map_err(|e: RankError| e.to_string())
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::UnknownMethod(id) => CliError::Usage(format!(
                "unknown method `{id}`; available methods:\n  {}",
                METHOD_IDS.join("\n  ")
            )),
            RankError::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the CLI against the process streams.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit output streams; `argv[0]` is the program name.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Some(threads) = std::env::var("RANK_ENGINE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // fails harmlessly when the global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Rank(a) => rank(a, out, err),
        Command::RankAll(a) => rank_all(a, out, err),
        Command::Stability(a) => stability(a, out),
        Command::Convergence(a) => convergence(a, out),
        Command::Bootstrap(a) => bootstrap(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Fixtures(a) => fixture(a, out),
    }
}

fn load(input: &InputArgs) -> CliResult<ResponseTensor> {
    let fmt = input
        .format
        .unwrap_or_else(|| TensorFormat::from_path(&input.input));
    io::read_tensor(&input.input, fmt).map_err(|e| CliError::Data(format!("{}: {e}", input.input.display())))
}

fn bind(method: &MethodArgs, input: &InputArgs, r: &ResponseTensor) -> CliResult<Method> {
    let mut m = Method::resolve(&method.method)?.with_params(&method.params)?;
    if let Some(seed) = input.seed {
        m.set_seed(seed);
    }
    if let Some(p) = &input.prior {
        let prior = io::read_prior(p, r.num_categories())
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        m = m.with_prior(Arc::new(prior));
    }
    Ok(m)
}

fn emit(report: &Report, output: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let res = match output {
        Some(p) => io::write_report(report, p),
        None => report.write_to(out),
    };
    res.map_err(|e| CliError::Data(e.to_string()))
}

fn warn(err: &mut dyn Write, id: &str, o: &MethodOutput) {
    for w in &o.warnings {
        let _ = writeln!(err, "warning [{id}]: {w}");
    }
}

fn push_rows(report: &mut Report, r: &ResponseTensor, o: &MethodOutput, family: Option<&str>) {
    for l in 0..r.models() {
        let mut row = vec![o.scores.method_id.clone()];
        if let Some(f) = family {
            row.push(f.to_string());
        }
        row.extend([
            r.model_label(l),
            format_g(o.scores.scores[l]),
            format_g(o.ranking.ranks[l]),
        ]);
        report.push(row);
    }
}

fn rank(a: RankArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let r = load(&a.input)?;
    let m = bind(&a.method, &a.input, &r)?;
    let o = m.run(&r)?;
    warn(err, m.id(), &o);
    let mut report = Report::new(["method", "model", "score", "rank"]);
    push_rows(&mut report, &r, &o, None);
    emit(&report, a.input.output.as_deref(), out)
}

fn rank_all(a: RankAllArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let r = load(&a.input)?;
    let methods: Vec<Method> = METHOD_IDS
        .iter()
        .map(|id| {
            let m = MethodArgs {
                method: id.to_string(),
                params: Vec::new(),
            };
            bind(&m, &a.input, &r)
        })
        .collect::<CliResult<_>>()?;
    let results: Vec<Option<rank_engine::Result<MethodOutput>>> = methods
        .par_iter()
        .map(|m| (m.required_trials() <= r.trials()).then(|| m.run(&r)))
        .collect();
    let mut report = Report::new(["method", "family", "model", "score", "rank"]);
    let mut failed = 0;
    for (m, res) in methods.iter().zip(results) {
        match res {
            None => {
                let _ = writeln!(
                    err,
                    "skipped [{}]: needs at least {} trials per question",
                    m.id(),
                    m.required_trials()
                );
            }
            Some(Ok(o)) => {
                warn(err, m.id(), &o);
                push_rows(&mut report, &r, &o, Some(m.family().name()));
            }
            Some(Err(e)) => {
                failed += 1;
                let _ = writeln!(err, "failed [{}]: {e}", m.id());
            }
        }
    }
    emit(&report, a.input.output.as_deref(), out)?;
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} methods failed")));
    }
    Ok(())
}

fn stability(a: StabilityArgs, out: &mut dyn Write) -> CliResult<()> {
    let r = load(&a.input)?;
    let m = bind(&a.method, &a.input, &r)?;
    let rep = evalproto::single_trial_stability(&r, &m, a.target.into())?;
    let mut report = Report::new([
        "method",
        "target",
        "mean_tau",
        "std_tau",
        "draws_used",
        "draws_excluded",
    ]);
    report.push(vec![
        rep.method_id.clone(),
        rep.target.name().to_string(),
        format_g(rep.mean_tau),
        format_g(rep.std_tau),
        rep.draws_used().to_string(),
        rep.draws_excluded.to_string(),
    ]);
    emit(&report, a.input.output.as_deref(), out)
}

fn convergence(a: ConvergenceArgs, out: &mut dyn Write) -> CliResult<()> {
    let r = load(&a.input)?;
    let m = bind(&a.method, &a.input, &r)?;
    let target: Target = a.target.into();
    let opts = CurveOptions {
        draws: a.draws,
        seed: a.input.seed.unwrap_or(DEFAULT_SEED),
        resampling: match a.resample {
            ResampleArg::Without => Resampling::WithoutReplacement,
            ResampleArg::With => Resampling::WithReplacement,
        },
        target,
    };
    let curve = evalproto::convergence_curve(&r, &m, &a.budgets, &opts)?;
    let mut report = Report::new([
        "method",
        "target",
        "budget",
        "mean_tau",
        "std_tau",
        "draws_used",
        "draws_excluded",
    ]);
    for p in curve {
        report.push(vec![
            m.id().to_string(),
            target.name().to_string(),
            p.budget.to_string(),
            format_g(p.mean_tau),
            format_g(p.std_tau),
            p.draws_used.to_string(),
            p.draws_excluded.to_string(),
        ]);
    }
    emit(&report, a.input.output.as_deref(), out)
}

fn bootstrap(a: BootstrapArgs, out: &mut dyn Write) -> CliResult<()> {
    let r = load(&a.input)?;
    let m = bind(&a.method, &a.input, &r)?;
    let opts = PoolOptions {
        n_subsets: a.subsets,
        seed: a.input.seed.unwrap_or(DEFAULT_SEED),
        target: a.target.into(),
    };
    let pools = evalproto::bootstrap_pools(&r, &m, &a.pool_sizes, &opts)?;
    let mut report = Report::new([
        "method",
        "target",
        "pool_size",
        "mean_tau",
        "std_tau",
        "subsets_used",
        "subsets_excluded",
        "draws_excluded",
    ]);
    for p in pools {
        report.push(vec![
            m.id().to_string(),
            p.report.target.name().to_string(),
            p.pool_size.to_string(),
            format_g(p.report.mean_tau),
            format_g(p.report.std_tau),
            p.report.draws_used().to_string(),
            p.subsets_excluded.to_string(),
            p.report.draws_excluded.to_string(),
        ]);
    }
    emit(&report, a.input.output.as_deref(), out)
}

/// Reads `method,...,model,...,rank` rows; returns (label, model -> rank) per method in file order.
fn read_rankings(path: &Path) -> CliResult<Vec<(String, BTreeMap<String, f64>)>> {
    let data = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| data(e.to_string()))?;
    let header = rdr.headers().map_err(|e| data(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let rank_col = col("rank").ok_or_else(|| data("missing `rank` column".into()))?;
    let model_col = col("model").ok_or_else(|| data("missing `model` column".into()))?;
    let method_col = col("method");
    let stem = path
        .file_stem()
        .map_or_else(|| "ranking".into(), |s| s.to_string_lossy().into_owned());
    let mut groups: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data(e.to_string()))?;
        let line = i + 2;
        let label = method_col.map_or_else(|| stem.clone(), |c| rec[c].to_string());
        let rank: f64 = rec[rank_col]
            .parse()
            .map_err(|_| data(format!("line {line}: rank `{}` is not a number", &rec[rank_col])))?;
        let idx = match groups.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                groups.push((label, BTreeMap::new()));
                groups.len() - 1
            }
        };
        if groups[idx].1.insert(rec[model_col].to_string(), rank).is_some() {
            return Err(data(format!(
                "line {line}: model `{}` listed twice",
                &rec[model_col]
            )));
        }
    }
    Ok(groups)
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut all = Vec::new();
    for p in &a.rankings {
        for (label, ranks) in read_rankings(p)? {
            let label = if all.iter().any(|(l, _): &(String, _)| *l == label) {
                format!("{}:{label}", p.display())
            } else {
                label
            };
            all.push((label, ranks));
        }
    }
    let Some((_, first)) = all.first() else {
        return Err(CliError::Data("no rankings found".into()));
    };
    let models: Vec<String> = first.keys().cloned().collect();
    let mut vectors = Vec::with_capacity(all.len());
    for (label, ranks) in &all {
        if ranks.len() != models.len() || models.iter().any(|m| !ranks.contains_key(m)) {
            return Err(CliError::Data(format!(
                "ranking `{label}` covers a different set of models"
            )));
        }
        vectors.push(models.iter().map(|m| ranks[m]).collect::<Vec<f64>>());
    }
    let mut header = vec!["ranking".to_string()];
    header.extend(all.iter().map(|(l, _)| l.clone()));
    let mut report = Report::new(header);
    for (i, (label, _)) in all.iter().enumerate() {
        let mut row = vec![label.clone()];
        for v in &vectors {
            row.push(match evalproto::kendall_tau_b(&vectors[i], v) {
                Ok(t) => format_g(t),
                Err(RankError::UndefinedCorrelation(_)) => "nan".into(),
                Err(e) => return Err(e.into()),
            });
        }
        report.push(row);
    }
    emit(&report, a.output.as_deref(), out)
}

fn fixture(a: FixtureArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.models == 0 || a.questions == 0 || a.trials == 0 {
        return Err(CliError::Usage("fixture dimensions must be positive".into()));
    }
    let r = match a.name {
        FixtureName::FixA => fixtures::fix_a_trials(a.trials),
        FixtureName::FixB => fixtures::fix_b(a.models, a.questions, a.trials),
        FixtureName::FixC => fixtures::fix_c(a.questions, a.trials),
    };
    let text = match a.format {
        TensorFormat::Json => io::tensor_to_json(&r) + "\n",
        TensorFormat::CsvLong => io::tensor_to_csv(&r),
    };
    let res = match &a.output {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    };
    res.map_err(|e| CliError::Data(e.to_string()))
}
