use std::path::{Path, PathBuf};

use rank_engine_cli::run_cli_with;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rank-engine").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn fixture(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}-{}.json", extra.join("")));
    let p = path.to_str().unwrap();
    let mut args = vec!["fixtures", name, "-o", p];
    args.extend_from_slice(extra);
    assert_eq!(run(&args).0, 0);
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rank_avg_prints_table() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (code, out, _) = run(&["rank", "--method", "avg", "--input", s(&fa)]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "method,model,score,rank\navg,0,0.75,1\navg,1,0.625,2\navg,2,0.25,3\n"
    );
}

#[test]
fn bradley_terry_reverses_the_top_two() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (code, out, _) = run(&["rank", "-m", "bradley_terry", "-i", s(&fa)]);
    assert_eq!(code, 0);
    let ranks: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(ranks, ["2", "1", "3"]);
}

#[test]
fn unknown_method_lists_catalogue() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (code, _, err) = run(&["rank", "--method", "nope", "--input", s(&fa)]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown method `nope`"));
    assert!(err.contains("rasch_mml_credible"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["rank"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (code, _, err) = run(&["rank", "-m", "pagerank", "-i", s(&fa), "--param", "bogus=1"]);
    assert_eq!(code, 2);
    assert!(err.contains("damping"));
    assert_eq!(
        run(&["rank", "-m", "pagerank", "-i", s(&fa), "--param", "novalue"]).0,
        2
    );
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("mean_tau,std_tau"));
}

#[test]
fn param_override_changes_output() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (_, base, _) = run(&["rank", "-m", "pagerank", "-i", s(&fa)]);
    let (code, tuned, _) = run(&["rank", "-m", "pagerank", "-i", s(&fa), "--param", "damping=0.5"]);
    assert_eq!(code, 0);
    assert_ne!(base, tuned);
}

#[test]
fn data_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "model,question,trial,outcome\n0,0,0,1\n1,1,0,1\n").unwrap();
    let (code, _, err) = run(&["rank", "-m", "avg", "-i", s(&bad)]);
    assert_eq!(code, 1);
    assert!(err.contains("missing cell"));
    let (code, _, _) = run(&["rank", "-m", "avg", "-i", s(&dir.path().join("absent.json"))]);
    assert_eq!(code, 1);
}

#[test]
fn stability_rejects_pass_at_k_on_single_trials() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &["--trials", "3"]);
    let (code, _, err) = run(&["stability", "--method", "pass_at_k_2", "--input", s(&fa)]);
    assert_eq!(code, 1);
    assert!(err.contains("requires at least 2 trials"));
}

#[test]
fn stability_on_replicated_tensor_is_perfect() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &["--trials", "4"]);
    let (code, out, _) = run(&["stability", "-m", "avg", "-i", s(&fa), "--target", "self"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "method,target,mean_tau,std_tau,draws_used,draws_excluded\navg,self,1,0,4,0\n"
    );
}

#[test]
fn convergence_and_bootstrap_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &["--trials", "4"]);
    let conv = [
        "convergence",
        "-m",
        "thompson",
        "-i",
        s(&fa),
        "--budgets",
        "1,2,4",
        "--draws",
        "5",
        "--seed",
        "3",
    ];
    let (code, a, _) = run(&conv);
    assert_eq!(code, 0);
    assert_eq!(a.lines().count(), 4);
    assert_eq!(run(&conv).1, a);
    let (code, _, _) = run(&["convergence", "-m", "avg", "-i", s(&fa), "--budgets", "5"]);
    assert_eq!(code, 1);

    let boot = [
        "bootstrap",
        "-m",
        "avg",
        "-i",
        s(&fa),
        "--pool-sizes",
        "2,3",
        "--subsets",
        "20",
    ];
    let (code, b, _) = run(&boot);
    assert_eq!(code, 0);
    assert!(b.contains("avg,gold,3,1,0,1,0,0"));
    assert_eq!(run(&boot).1, b);
}

#[test]
fn rank_all_and_compare() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &["--trials", "2"]);
    let all = dir.path().join("all.csv");
    let (code, _, err) = run(&["rank-all", "-i", s(&fa), "-o", s(&all)]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&all).unwrap();
    assert_eq!(text.lines().count(), 1 + 72 * 3);

    let single = dir.path().join("avg.csv");
    assert_eq!(run(&["rank", "-m", "avg", "-i", s(&fa), "-o", s(&single)]).0, 0);
    let (code, out, _) = run(&["compare", s(&single), s(&all)]);
    assert_eq!(code, 0);
    let header = out.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 1 + 1 + 72);
    // the stand-alone avg ranking agrees perfectly with the avg rows inside rank-all
    let first = out.lines().nth(1).unwrap();
    assert!(first.starts_with("avg,1,1,"));
}

#[test]
fn rank_all_skips_multi_trial_methods_on_single_trials() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (code, out, err) = run(&["rank-all", "-i", s(&fa)]);
    assert_eq!(code, 0);
    assert!(err.contains("skipped [pass_at_k_2]"));
    assert_eq!(out.lines().count(), 1 + 69 * 3);
}

#[test]
fn prior_file_silences_missing_prior_warning() {
    let dir = TempDir::new().unwrap();
    let fa = fixture(&dir, "fix-a", &[]);
    let (_, _, err) = run(&["rank", "-m", "bayes_greedy", "-i", s(&fa)]);
    assert!(err.contains("MissingPrior"));
    let prior = dir.path().join("prior.json");
    std::fs::write(&prior, r#"{"data": [[0],[0],[1],[1],[1],[1],[1],[1]]}"#).unwrap();
    let (code, _, err) = run(&["rank", "-m", "bayes_greedy", "-i", s(&fa), "--prior", s(&prior)]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
}

#[test]
fn fixtures_in_csv() {
    let (code, out, _) = run(&["fixtures", "fix-c", "--questions", "2", "--format", "csv-long"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "model,question,trial,outcome\n0,0,0,1\n0,1,0,1\n1,0,0,0\n1,1,0,0\n"
    );
}
