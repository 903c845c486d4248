//! Evaluation protocols: Kendall correlations, gold-standard agreement, single-trial stability,
//! convergence curves, bootstrapped model pools and greedy-prior diagnostics.
//!
//! Draws and subsets run in parallel on the rayon pool. Each one owns its RNG stream and
//! results are collected in index order, so every report is bit-identical to a serial run.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::metrics;
use crate::ranking::{scores_to_ranking, Ranking, ScoreVector, TieRule};
use crate::tensor::{PriorOutcomes, ResponseTensor};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CURVE_DRAWS: usize = 50;
pub const DEFAULT_SUBSETS: usize = 1000;
pub const DEFAULT_PRIOR_REPLICATES: usize = 50;

/// Anything that turns a tensor into a ranking.
pub trait Ranker: Sync {
    fn id(&self) -> String;

    /// Smallest trial count the method accepts.
    fn min_trials(&self) -> usize {
        1
    }

    fn rank(&self, r: &ResponseTensor) -> Result<Ranking>;
}

/// Adapts a score function; scores are ranked with average ties.
pub struct FnRanker<F> {
    id: String,
    min_trials: usize,
    f: F,
}

impl<F> FnRanker<F>
where
    F: Fn(&ResponseTensor) -> Result<ScoreVector> + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        Self {
            id: id.into(),
            min_trials: 1,
            f,
        }
    }

    pub fn with_min_trials(mut self, n: usize) -> Self {
        self.min_trials = n;
        self
    }
}

impl<F> Ranker for FnRanker<F>
where
    F: Fn(&ResponseTensor) -> Result<ScoreVector> + Sync,
{
    fn id(&self) -> String {
        self.id.clone()
    }

    fn min_trials(&self) -> usize {
        self.min_trials
    }

    fn rank(&self, r: &ResponseTensor) -> Result<Ranking> {
        (self.f)(r)?.to_ranking()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauVariant {
    A,
    B,
}

/// Kendall's tau between two equally long vectors where larger means "better" in both or
/// "worse" in both (scores against scores, or ranks against ranks).
pub fn kendall_tau(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64> {
    if x.len() != y.len() {
        return Err(RankError::DimensionMismatch(format!(
            "cannot correlate vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(RankError::param("Kendall's tau needs at least two entries"));
    }
    for v in [x, y] {
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(RankError::InvalidScore { index, value });
        }
    }
    let (mut nc, mut nd, mut tx, mut ty) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).map_or(0, |o| o as i8);
            let b = (y[i] - y[j]).partial_cmp(&0.0).map_or(0, |o| o as i8);
            if a == 0 {
                tx += 1;
            }
            if b == 0 {
                ty += 1;
            }
            match a * b {
                1 => nc += 1,
                -1 => nd += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let num = nc as f64 - nd as f64;
    match variant {
        TauVariant::A => Ok(num / n0),
        TauVariant::B => {
            let denom = ((n0 - tx as f64) * (n0 - ty as f64)).sqrt();
            if denom == 0.0 {
                Err(RankError::UndefinedCorrelation(
                    "tau-b is undefined when one argument is entirely tied".into(),
                ))
            } else {
                Ok(num / denom)
            }
        }
    }
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    kendall_tau(x, y, TauVariant::B)
}

/// Tau-b between two rankings.
pub fn ranking_tau_b(a: &Ranking, b: &Ranking) -> Result<f64> {
    kendall_tau_b(&a.ranks, &b.ranks)
}

/// Uniform-prior posterior-mean ranking over all trials.
pub fn gold_standard(r: &ResponseTensor) -> Result<Ranking> {
    let w = metrics::default_weights(r.num_categories());
    let (s, _) = metrics::bayes(r, &w, None, None)?;
    scores_to_ranking(&s.scores, TieRule::Average)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The uniform-prior Bayes ranking on the full tensor.
    #[default]
    Gold,
    /// The method itself on the full tensor.
    #[serde(rename = "self")]
    SelfFull,
}

impl std::str::FromStr for Target {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gold" => Ok(Target::Gold),
            "self" => Ok(Target::SelfFull),
            other => Err(RankError::config(format!("unknown target `{other}` (gold|self)"))),
        }
    }
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Gold => "gold",
            Target::SelfFull => "self",
        }
    }

    fn reference(self, r: &ResponseTensor, ranker: &dyn Ranker) -> Result<Ranking> {
        match self {
            Target::Gold => gold_standard(r),
            Target::SelfFull => ranker.rank(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub method_id: String,
    pub target: Target,
    pub mean_tau: f64,
    /// Population standard deviation of `per_draw_taus`.
    pub std_tau: f64,
    /// Tau-b of every usable draw, in draw order.
    pub per_draw_taus: Vec<f64>,
    /// Draws whose tau-b was undefined (an all-tied ranking).
    pub draws_excluded: usize,
}

impl StabilityReport {
    pub fn draws_used(&self) -> usize {
        self.per_draw_taus.len()
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Splits tau results into usable values and a count of undefined ones.
fn collect_taus(results: Vec<Result<f64>>) -> Result<(Vec<f64>, usize)> {
    let mut taus = Vec::with_capacity(results.len());
    let mut excluded = 0;
    for r in results {
        match r {
            Ok(t) => taus.push(t),
            Err(RankError::UndefinedCorrelation(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((taus, excluded))
}

fn require_trials(ranker: &dyn Ranker, n: usize) -> Result<()> {
    let need = ranker.min_trials();
    if n < need {
        return Err(RankError::param(format!(
            "method `{}` requires at least {need} trials per question, but the protocol evaluates it on {n}",
            ranker.id()
        )));
    }
    Ok(())
}

fn report(method_id: String, target: Target, taus: Vec<f64>, excluded: usize) -> Result<StabilityReport> {
    if taus.is_empty() {
        return Err(RankError::UndefinedCorrelation(format!(
            "tau-b was undefined for all {excluded} draws of `{method_id}`"
        )));
    }
    let (mean_tau, std_tau) = mean_std(&taus);
    Ok(StabilityReport {
        method_id,
        target,
        mean_tau,
        std_tau,
        per_draw_taus: taus,
        draws_excluded: excluded,
    })
}

/// Ranks every single-trial slice `R[:, :, n]` and correlates it with the target.
pub fn single_trial_stability(
    r: &ResponseTensor,
    ranker: &dyn Ranker,
    target: Target,
) -> Result<StabilityReport> {
    require_trials(ranker, 1)?;
    let reference = target.reference(r, ranker)?;
    let results: Vec<Result<f64>> = (0..r.trials())
        .into_par_iter()
        .map(|n| {
            let slice = r.trial_slice(n)?;
            ranking_tau_b(&ranker.rank(&slice)?, &reference)
        })
        .collect();
    let (taus, excluded) = collect_taus(results)?;
    report(ranker.id(), target, taus, excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    #[default]
    WithoutReplacement,
    WithReplacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub draws: usize,
    pub seed: u64,
    pub resampling: Resampling,
    pub target: Target,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            draws: DEFAULT_CURVE_DRAWS,
            seed: DEFAULT_SEED,
            resampling: Resampling::WithoutReplacement,
            target: Target::SelfFull,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget: usize,
    pub mean_tau: f64,
    pub std_tau: f64,
    pub draws_used: usize,
    pub draws_excluded: usize,
}

/// Per-question trial picks for one draw; kept in ascending order so order-dependent methods
/// see the trials in their original sequence.
fn draw_picks(
    rng: &mut ChaCha8Rng,
    questions: usize,
    trials: usize,
    n: usize,
    resampling: Resampling,
) -> Vec<Vec<usize>> {
    (0..questions)
        .map(|_| {
            let mut pick: Vec<usize> = match resampling {
                Resampling::WithoutReplacement => sample(rng, trials, n).into_vec(),
                Resampling::WithReplacement => (0..n).map(|_| rng.random_range(0..trials)).collect(),
            };
            pick.sort_unstable();
            pick
        })
        .collect()
}

fn draw_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Tau-b against the full-budget reference as the per-question trial budget grows.
pub fn convergence_curve(
    r: &ResponseTensor,
    ranker: &dyn Ranker,
    budgets: &[usize],
    opts: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    let total = r.trials();
    for &n in budgets {
        if n == 0 || n > total {
            return Err(RankError::param(format!("budget {n} must lie in 1..={total}")));
        }
        require_trials(ranker, n)?;
    }
    if opts.draws == 0 {
        return Err(RankError::param("at least one draw is required"));
    }
    let reference = opts.target.reference(r, ranker)?;
    budgets
        .iter()
        .map(|&n| {
            let exact = n == total && opts.resampling == Resampling::WithoutReplacement;
            let draws = if exact { 1 } else { opts.draws };
            let results: Vec<Result<f64>> = (0..draws)
                .into_par_iter()
                .map(|d| {
                    let sub = if exact {
                        r.clone()
                    } else {
                        // stream = budget * 2^32 + draw keeps every (budget, draw) pair distinct
                        let mut rng = draw_rng(opts.seed, ((n as u64) << 32) | d as u64);
                        r.select_trials_per_question(&draw_picks(
                            &mut rng,
                            r.questions(),
                            total,
                            n,
                            opts.resampling,
                        ))?
                    };
                    ranking_tau_b(&ranker.rank(&sub)?, &reference)
                })
                .collect();
            let (taus, excluded) = collect_taus(results)?;
            let (mean_tau, std_tau) = if taus.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_std(&taus)
            };
            Ok(CurvePoint {
                budget: n,
                mean_tau,
                std_tau,
                draws_used: taus.len(),
                draws_excluded: excluded,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolOptions {
    pub n_subsets: usize,
    pub seed: u64,
    pub target: Target,
}

impl Default for PoolOptions {
    fn default() -> Self {
        Self {
            n_subsets: DEFAULT_SUBSETS,
            seed: DEFAULT_SEED,
            target: Target::Gold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolReport {
    pub pool_size: usize,
    /// Aggregate over subsets: `per_draw_taus` holds the subset-level mean tau-b values.
    pub report: StabilityReport,
    /// Subsets whose every draw was undefined.
    pub subsets_excluded: usize,
}

/// Single-trial stability on random model pools; each subset uses its own gold standard
/// (or its own full-budget method ranking for the `self` target).
pub fn bootstrap_pools(
    r: &ResponseTensor,
    ranker: &dyn Ranker,
    pool_sizes: &[usize],
    opts: &PoolOptions,
) -> Result<Vec<PoolReport>> {
    let l = r.models();
    for &s in pool_sizes {
        if s < 2 || s > l {
            return Err(RankError::param(format!("pool size {s} must lie in 2..={l}")));
        }
    }
    if opts.n_subsets == 0 {
        return Err(RankError::param("at least one subset is required"));
    }
    require_trials(ranker, 1)?;
    pool_sizes
        .iter()
        .map(|&s| {
            let subsets = if s == l { 1 } else { opts.n_subsets };
            let results: Vec<Result<StabilityReport>> = (0..subsets)
                .into_par_iter()
                .map(|k| {
                    let sub = if s == l {
                        r.clone()
                    } else {
                        let mut rng = draw_rng(opts.seed, ((s as u64) << 32) | k as u64);
                        let mut models = sample(&mut rng, l, s).into_vec();
                        models.sort_unstable();
                        r.select_models(&models)?
                    };
                    single_trial_stability(&sub, ranker, opts.target)
                })
                .collect();
            let mut means = Vec::with_capacity(subsets);
            let mut draws_excluded = 0;
            let mut subsets_excluded = 0;
            for res in results {
                match res {
                    Ok(rep) => {
                        draws_excluded += rep.draws_excluded;
                        means.push(rep.mean_tau);
                    }
                    Err(RankError::UndefinedCorrelation(_)) => subsets_excluded += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(PoolReport {
                pool_size: s,
                report: report(ranker.id(), opts.target, means, draws_excluded)?,
                subsets_excluded,
            })
        })
        .collect()
}

/// Tau-b between the mean-accuracy ranking of per-model greedy outcomes (`L x M`, binary) and
/// the mean-accuracy ranking of the sampled tensor.
pub fn greedy_alignment(r: &ResponseTensor, greedy: &[Vec<u8>]) -> Result<f64> {
    r.require_binary("greedy_alignment")?;
    if greedy.len() != r.models() || greedy.iter().any(|row| row.len() != r.questions()) {
        return Err(RankError::DimensionMismatch(format!(
            "greedy matrix must be {}x{}",
            r.models(),
            r.questions()
        )));
    }
    if greedy.iter().flatten().any(|&v| v > 1) {
        return Err(RankError::Category("greedy outcomes must be 0 or 1".into()));
    }
    let greedy_scores: Vec<f64> = greedy
        .iter()
        .map(|row| row.iter().map(|&v| v as f64).sum::<f64>() / row.len() as f64)
        .collect();
    let g = scores_to_ranking(&greedy_scores, TieRule::Average)?;
    let s = metrics::avg(r)?.to_ranking()?;
    ranking_tau_b(&g, &s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEffectPoint {
    pub budget: usize,
    pub uniform: CurvePoint,
    pub greedy: CurvePoint,
}

/// Trial-bootstrap comparison of the uniform-prior and greedy-prior Bayes rankings against the
/// gold standard. Both estimators see the same resampled tensors.
pub fn prior_effect(
    r: &ResponseTensor,
    prior: &PriorOutcomes,
    budgets: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<PriorEffectPoint>> {
    let w = metrics::default_weights(r.num_categories());
    let uniform = FnRanker::new("bayes", |t: &ResponseTensor| {
        Ok(metrics::bayes(t, &w, None, None)?.0)
    });
    let greedy = FnRanker::new("bayes_greedy", |t: &ResponseTensor| {
        Ok(metrics::bayes_greedy(t, &w, prior)?.0)
    });
    let opts = CurveOptions {
        draws: replicates,
        seed,
        resampling: Resampling::WithReplacement,
        target: Target::Gold,
    };
    let u = convergence_curve(r, &uniform, budgets, &opts)?;
    let g = convergence_curve(r, &greedy, budgets, &opts)?;
    Ok(u.into_iter()
        .zip(g)
        .map(|(uniform, greedy)| PriorEffectPoint {
            budget: uniform.budget,
            uniform,
            greedy,
        })
        .collect())
}
