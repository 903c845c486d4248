//! Graph, spectral, game-theoretic, seriation and Hodge rankers over pairwise win probabilities.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{fiedler, maximin, pinv_solve, stationary};
use crate::ranking::{scores_to_ranking, Ranking, ScoreVector, TieRule, Warning, WarningKind};
use crate::tensor::{pairwise_counts, PairwiseCounts, ResponseTensor};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_SPECTRAL_ITER: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_POPULATION: usize = 50;
pub const DEFAULT_LOG_ODDS_EPSILON: f64 = 0.5;

/// `P_ij = (W_ij + T_ij / 2) / (W_ij + W_ji + T_ij)`, with `1/2` on the diagonal and for pairs
/// that were never compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinProbMatrix {
    pub probs: Vec<Vec<f64>>,
}

impl WinProbMatrix {
    pub fn from_counts(c: &PairwiseCounts) -> Self {
        let l = c.models();
        let probs = (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| {
                        let total = c.total(i, j);
                        if i == j || total == 0 {
                            0.5
                        } else {
                            (c.wins[i][j] as f64 + 0.5 * c.ties[i][j] as f64) / total as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self { probs }
    }

    pub fn models(&self) -> usize {
        self.probs.len()
    }
}

pub fn win_prob_matrix(r: &ResponseTensor) -> Result<WinProbMatrix> {
    Ok(WinProbMatrix::from_counts(&pairwise_counts(r)?))
}

/// PageRank over the graph where each model links to the models that beat it.
///
/// The fixed point `r = d P r + (1 - d) / L` is solved directly rather than iterated.
pub fn pagerank_from_probs(p: &WinProbMatrix, damping: f64) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(RankError::param(format!("damping {damping} must lie in (0, 1)")));
    }
    let l = p.models();
    if l == 0 {
        return Ok(Vec::new());
    }
    let mut trans = DMatrix::<f64>::zeros(l, l);
    for j in 0..l {
        let col: f64 = (0..l).filter(|&k| k != j).map(|k| p.probs[k][j]).sum();
        for i in 0..l {
            trans[(i, j)] = if col > 0.0 {
                if i == j {
                    0.0
                } else {
                    p.probs[i][j] / col
                }
            } else {
                1.0 / l as f64
            };
        }
    }
    let system = DMatrix::<f64>::identity(l, l) - trans * damping;
    let rhs = DVector::<f64>::from_element(l, (1.0 - damping) / l as f64);
    let r = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| RankError::Numerical("singular PageRank system".into()))?;
    let total: f64 = r.iter().sum();
    Ok(r.iter().map(|v| v.max(0.0) / total).collect())
}

pub fn pagerank(r: &ResponseTensor, damping: f64) -> Result<ScoreVector> {
    let p = win_prob_matrix(r)?;
    Ok(ScoreVector::new("pagerank", pagerank_from_probs(&p, damping)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFit {
    pub scores: ScoreVector,
    pub iterations: usize,
    pub converged: bool,
}

/// Principal right eigenvector, normalized to sum 1, of the matrix with off-diagonal `P_ij` and
/// the row sums on the diagonal. Power iteration from the uniform vector.
pub fn spectral_from_probs(p: &WinProbMatrix, max_iter: usize, tol: f64) -> (Vec<f64>, usize, bool) {
    let l = p.models();
    if l == 0 {
        return (Vec::new(), 0, true);
    }
    let mut w = vec![vec![0.0; l]; l];
    for i in 0..l {
        let mut row = 0.0;
        for j in 0..l {
            if i != j {
                w[i][j] = p.probs[i][j];
                row += p.probs[i][j];
            }
        }
        w[i][i] = row;
    }
    let mut v = vec![1.0 / l as f64; l];
    for it in 1..=max_iter {
        let mut next: Vec<f64> = w
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            return (vec![1.0 / l as f64; l], it, true);
        }
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if delta <= tol {
            return (v, it, true);
        }
    }
    (v, max_iter, false)
}

pub fn spectral(r: &ResponseTensor, max_iter: usize, tol: f64) -> Result<SpectralFit> {
    let p = win_prob_matrix(r)?;
    let (v, iterations, converged) = spectral_from_probs(&p, max_iter, tol);
    Ok(SpectralFit {
        scores: ScoreVector::new("spectral", v),
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieHandling {
    #[default]
    Half,
    Ignore,
}

impl FromStr for TieHandling {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::Half),
            "ignore" => Ok(Self::Ignore),
            other => Err(RankError::config(format!("unknown tie handling `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCentralityOptions {
    pub tie_handling: TieHandling,
    /// Pseudo-count added to each side of every compared pair.
    pub smoothing: f64,
    /// Weight of a uniform restart mixed into the chain.
    pub teleport: f64,
}

impl Default for RankCentralityOptions {
    fn default() -> Self {
        Self {
            tie_handling: TieHandling::Half,
            smoothing: 0.0,
            teleport: 0.0,
        }
    }
}

/// Row-stochastic Rank Centrality chain: from `i` move to `j` with probability
/// `P(j beats i) / d_max`.
pub fn rank_centrality_chain(c: &PairwiseCounts, opts: &RankCentralityOptions) -> Result<Vec<Vec<f64>>> {
    if !(opts.smoothing >= 0.0 && opts.smoothing.is_finite()) {
        return Err(RankError::param(format!(
            "smoothing {} must be non-negative",
            opts.smoothing
        )));
    }
    if !(0.0..=1.0).contains(&opts.teleport) {
        return Err(RankError::param(format!(
            "teleport {} must lie in [0, 1]",
            opts.teleport
        )));
    }
    let l = c.models();
    let beats = |i: usize, j: usize| -> Option<f64> {
        let (num, den) = match opts.tie_handling {
            TieHandling::Half => (
                c.wins[i][j] as f64 + 0.5 * c.ties[i][j] as f64,
                c.total(i, j) as f64,
            ),
            TieHandling::Ignore => (c.wins[i][j] as f64, c.decisive(i, j) as f64),
        };
        let den = den + 2.0 * opts.smoothing;
        (den > 0.0).then(|| (num + opts.smoothing) / den)
    };
    let degree = (0..l)
        .map(|i| (0..l).filter(|&j| j != i && beats(i, j).is_some()).count())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let mut p = vec![vec![0.0; l]; l];
    for i in 0..l {
        let mut out = 0.0;
        for j in 0..l {
            if i != j {
                if let Some(q) = beats(j, i) {
                    p[i][j] = q / degree;
                    out += p[i][j];
                }
            }
        }
        p[i][i] = 1.0 - out;
    }
    if opts.teleport > 0.0 {
        for row in p.iter_mut() {
            for v in row.iter_mut() {
                *v = (1.0 - opts.teleport) * *v + opts.teleport / l as f64;
            }
        }
    }
    Ok(p)
}

pub fn rank_centrality(r: &ResponseTensor, opts: &RankCentralityOptions) -> Result<ScoreVector> {
    let chain = rank_centrality_chain(&pairwise_counts(r)?, opts)?;
    let id = match opts.tie_handling {
        TieHandling::Half => "rank_centrality_tie_half",
        TieHandling::Ignore => "rank_centrality_tie_ignore",
    };
    Ok(ScoreVector::new(id, stationary(&chain)?))
}

/// Fixation probability of a mutant with payoff `payoff` against the resident
/// (`payoff = 1/2` is neutral), for selection intensity `alpha` and population size `m`.
pub fn fixation_probability(payoff: f64, alpha: f64, m: usize) -> f64 {
    let mf = m as f64;
    let u = alpha * mf / (mf - 1.0) * (payoff - 0.5);
    if u == 0.0 {
        1.0 / mf
    } else if u > 0.0 {
        (-u).exp_m1() / (-mf * u).exp_m1()
    } else {
        let v = -u;
        (-(mf - 1.0) * v).exp() * (-v).exp_m1() / (-mf * v).exp_m1()
    }
}

pub fn alpharank_chain(p: &WinProbMatrix, alpha: f64, population: usize) -> Result<Vec<Vec<f64>>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(RankError::param(format!("alpha {alpha} must be non-negative")));
    }
    if population < 2 {
        return Err(RankError::param(format!(
            "population size {population} must be at least 2"
        )));
    }
    let l = p.models();
    if l == 1 {
        return Ok(vec![vec![1.0]]);
    }
    let mut c = vec![vec![0.0; l]; l];
    for s in 0..l {
        let mut out = 0.0;
        for r in 0..l {
            if r != s {
                c[s][r] = fixation_probability(p.probs[r][s], alpha, population) / (l - 1) as f64;
                out += c[s][r];
            }
        }
        c[s][s] = 1.0 - out;
    }
    Ok(c)
}

pub fn alpharank(r: &ResponseTensor, alpha: f64, population: usize) -> Result<ScoreVector> {
    let chain = alpharank_chain(&win_prob_matrix(r)?, alpha, population)?;
    Ok(ScoreVector::new("alpharank", stationary(&chain)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NashScore {
    /// Expected win probability against the equilibrium mixture.
    #[default]
    VsEquilibrium,
    /// The same minus one half.
    AdvantageVsEquilibrium,
}

impl FromStr for NashScore {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vs_equilibrium" => Ok(Self::VsEquilibrium),
            "advantage_vs_equilibrium" => Ok(Self::AdvantageVsEquilibrium),
            other => Err(RankError::config(format!("unknown Nash score type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashFit {
    pub scores: ScoreVector,
    pub equilibrium: Vec<f64>,
    pub game_value: f64,
}

pub fn nash_from_probs(p: &WinProbMatrix, score: NashScore) -> Result<NashFit> {
    let l = p.models();
    let payoff: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| if i == j { 0.0 } else { 2.0 * p.probs[i][j] - 1.0 })
                .collect()
        })
        .collect();
    let sol = maximin(&payoff)?;
    let x = sol.strategy;
    let shift = match score {
        NashScore::VsEquilibrium => 0.0,
        NashScore::AdvantageVsEquilibrium => 0.5,
    };
    let scores = p
        .probs
        .iter()
        .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - shift)
        .collect();
    let id = match score {
        NashScore::VsEquilibrium => "nash_vs_equilibrium",
        NashScore::AdvantageVsEquilibrium => "nash_advantage_vs_equilibrium",
    };
    Ok(NashFit {
        scores: ScoreVector::new(id, scores),
        equilibrium: x,
        game_value: sol.value,
    })
}

pub fn nash(r: &ResponseTensor, score: NashScore) -> Result<NashFit> {
    nash_from_probs(&win_prob_matrix(r)?, score)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerialComparison {
    /// Normalized win difference `(W_ij - W_ji) / (W_ij + W_ji + T_ij)`.
    #[default]
    ProbDiff,
    /// Its sign.
    Sign,
}

impl FromStr for SerialComparison {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob_diff" => Ok(Self::ProbDiff),
            "sign" => Ok(Self::Sign),
            other => Err(RankError::config(format!("unknown comparison `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialRankFit {
    /// Oriented Fiedler vector (all zero when the seriation is degenerate).
    pub scores: ScoreVector,
    pub ranking: Ranking,
    pub warnings: Vec<Warning>,
}

pub fn serial_rank_from_counts(c: &PairwiseCounts, comparison: SerialComparison) -> Result<SerialRankFit> {
    let l = c.models();
    let id = match comparison {
        SerialComparison::ProbDiff => "serial_rank_prob_diff",
        SerialComparison::Sign => "serial_rank_sign",
    };
    let cmp: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    let total = c.total(i, j);
                    if i == j || total == 0 {
                        return 0.0;
                    }
                    let d = (c.wins[i][j] as f64 - c.wins[j][i] as f64) / total as f64;
                    match comparison {
                        SerialComparison::ProbDiff => d,
                        SerialComparison::Sign => {
                            if d > 0.0 {
                                1.0
                            } else if d < 0.0 {
                                -1.0
                            } else {
                                0.0
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    let degenerate = |msg: &str| -> Result<SerialRankFit> {
        Ok(SerialRankFit {
            scores: ScoreVector::new(id, vec![0.0; l]),
            ranking: Ranking::all_tied(l, TieRule::Average),
            warnings: vec![Warning::new(WarningKind::DegenerateSeriation, msg)],
        })
    };
    if l < 2 {
        return Ok(SerialRankFit {
            scores: ScoreVector::new(id, vec![0.0; l]),
            ranking: Ranking::all_tied(l, TieRule::Average),
            warnings: Vec::new(),
        });
    }
    if cmp.iter().flatten().all(|&v| v == 0.0) {
        return degenerate("no net preference between any pair; all models tied");
    }
    let lf = l as f64;
    let mut lap = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            let cc: f64 = (0..l).map(|k| cmp[i][k] * cmp[j][k]).sum();
            lap[i][j] = -0.5 * (lf + cc);
        }
    }
    for i in 0..l {
        let row: f64 = (0..l).filter(|&j| j != i).map(|j| lap[i][j]).sum();
        lap[i][i] = -row;
    }
    let f = fiedler(&lap)?;
    if f.degenerate {
        return degenerate("second Laplacian eigenvalue is repeated; ordering is not identified");
    }
    let (mut agree, mut disagree) = (0usize, 0usize);
    for i in 0..l {
        for j in 0..l {
            if cmp[i][j] > 0.0 {
                if f.vector[i] > f.vector[j] {
                    agree += 1;
                } else if f.vector[i] < f.vector[j] {
                    disagree += 1;
                }
            }
        }
    }
    let sign = if disagree > agree { -1.0 } else { 1.0 };
    let scores: Vec<f64> = f.vector.iter().map(|v| sign * v).collect();
    let ranking = scores_to_ranking(&scores, TieRule::Average)?;
    Ok(SerialRankFit {
        scores: ScoreVector::new(id, scores),
        ranking,
        warnings: Vec::new(),
    })
}

pub fn serial_rank(r: &ResponseTensor, comparison: SerialComparison) -> Result<SerialRankFit> {
    serial_rank_from_counts(&pairwise_counts(r)?, comparison)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseStat {
    #[default]
    Binary,
    LogOdds,
}

impl FromStr for PairwiseStat {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::Binary),
            "log_odds" => Ok(Self::LogOdds),
            other => Err(RankError::config(format!("unknown pairwise statistic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeight {
    #[default]
    Total,
    Decisive,
    Uniform,
}

impl FromStr for EdgeWeight {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Self::Total),
            "decisive" => Ok(Self::Decisive),
            "uniform" => Ok(Self::Uniform),
            other => Err(RankError::config(format!("unknown weight method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HodgeOptions {
    pub stat: PairwiseStat,
    pub weight: EdgeWeight,
    pub epsilon: f64,
}

impl Default for HodgeOptions {
    fn default() -> Self {
        Self {
            stat: PairwiseStat::Binary,
            weight: EdgeWeight::Total,
            epsilon: DEFAULT_LOG_ODDS_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeDiagnostics {
    /// Weighted norm of the flow left after removing the fitted gradient.
    pub residual_norm: f64,
    /// `residual_norm` relative to the weighted norm of the observed flow (0 for a zero flow).
    pub cyclicity: f64,
    /// Largest entry of `Laplacian * s - divergence`.
    pub normal_equation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeFit {
    pub scores: ScoreVector,
    pub diagnostics: HodgeDiagnostics,
}

/// Minimum-norm least-squares potential `s` with `s_j - s_i ~ flow[i][j]` under symmetric
/// edge weights. `flow` must be skew-symmetric.
pub fn hodge_potential(flow: &[Vec<f64>], weights: &[Vec<f64>]) -> Result<(Vec<f64>, HodgeDiagnostics)> {
    let l = flow.len();
    if weights.len() != l || flow.iter().chain(weights).any(|r| r.len() != l) {
        return Err(RankError::DimensionMismatch(
            "flow and weights must be square and equal size".into(),
        ));
    }
    let mut lap = vec![vec![0.0; l]; l];
    let mut div = vec![0.0; l];
    for i in 0..l {
        for j in 0..l {
            if i != j {
                lap[i][j] = -weights[i][j];
                lap[i][i] += weights[i][j];
                div[i] -= weights[i][j] * flow[i][j];
            }
        }
    }
    let s = if l == 0 {
        Vec::new()
    } else {
        pinv_solve(&lap, &div)?
    };
    let (mut res, mut obs) = (0.0, 0.0);
    for i in 0..l {
        for j in i + 1..l {
            let r = s[j] - s[i] - flow[i][j];
            res += weights[i][j] * r * r;
            obs += weights[i][j] * flow[i][j] * flow[i][j];
        }
    }
    let normal_equation_error = (0..l)
        .map(|i| ((0..l).map(|j| lap[i][j] * s[j]).sum::<f64>() - div[i]).abs())
        .fold(0.0, f64::max);
    let residual_norm = res.sqrt();
    Ok((
        s,
        HodgeDiagnostics {
            residual_norm,
            cyclicity: if obs > 0.0 {
                residual_norm / obs.sqrt()
            } else {
                0.0
            },
            normal_equation_error,
        },
    ))
}

pub fn hodge_rank_from_counts(c: &PairwiseCounts, opts: &HodgeOptions) -> Result<HodgeFit> {
    if opts.stat == PairwiseStat::LogOdds && !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(RankError::param(format!(
            "epsilon {} must be positive",
            opts.epsilon
        )));
    }
    let l = c.models();
    let p = WinProbMatrix::from_counts(c);
    let mut flow = vec![vec![0.0; l]; l];
    let mut weights = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            if i == j || c.total(i, j) == 0 {
                continue;
            }
            flow[i][j] = match opts.stat {
                PairwiseStat::Binary => p.probs[j][i] - p.probs[i][j],
                PairwiseStat::LogOdds => {
                    ((c.wins[j][i] as f64 + opts.epsilon) / (c.wins[i][j] as f64 + opts.epsilon)).ln()
                }
            };
            weights[i][j] = match opts.weight {
                EdgeWeight::Total => c.total(i, j) as f64,
                EdgeWeight::Decisive => c.decisive(i, j) as f64,
                EdgeWeight::Uniform => 1.0,
            };
        }
    }
    let (s, diagnostics) = hodge_potential(&flow, &weights)?;
    let id = format!(
        "hodge_rank_{}_{}",
        match opts.stat {
            PairwiseStat::Binary => "binary",
            PairwiseStat::LogOdds => "log_odds",
        },
        match opts.weight {
            EdgeWeight::Total => "total",
            EdgeWeight::Decisive => "decisive",
            EdgeWeight::Uniform => "uniform",
        }
    );
    Ok(HodgeFit {
        scores: ScoreVector::new(id, s),
        diagnostics,
    })
}

pub fn hodge_rank(r: &ResponseTensor, opts: &HodgeOptions) -> Result<HodgeFit> {
    hodge_rank_from_counts(&pairwise_counts(r)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c, random_binary};
    use proptest::prelude::*;

    fn assert_distribution(v: &[f64]) {
        assert!(v.iter().all(|&x| x >= 0.0), "{v:?}");
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{v:?}");
    }

    fn stationary_residual(pi: &[f64], p: &[Vec<f64>]) -> f64 {
        (0..pi.len())
            .map(|j| ((0..pi.len()).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs())
            .fold(0.0, f64::max)
    }

    fn uniform(v: &[f64]) -> bool {
        let u = 1.0 / v.len() as f64;
        v.iter().all(|x| (x - u).abs() < 1e-12)
    }

    /// Models with strictly ordered solve rates on every question: model `i` solves the first
    /// `L - i` trials of each question out of `L`.
    fn dominance(l: usize) -> ResponseTensor {
        let mut flat = Vec::new();
        for i in 0..l {
            for _q in 0..3 {
                for n in 0..l {
                    flat.push(u8::from(n < l - i));
                }
            }
        }
        ResponseTensor::binary(l, 3, l, flat).unwrap()
    }

    #[test]
    fn win_probs_are_complementary() {
        for seed in 0..30 {
            let p = win_prob_matrix(&random_binary(4, 5, 3, seed)).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((p.probs[i][j] + p.probs[j][i] - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn pagerank_cases() {
        assert!(uniform(&pagerank(&fix_b(4, 3, 2), 0.85).unwrap().scores));
        let c = pagerank(&fix_c(3, 2), 0.85).unwrap().scores;
        // column 0 is dangling (uniform); column 1 sends everything to 0:
        // r0 = d (r0/2 + r1) + 0.075, r1 = d r0 / 2 + 0.075
        let d = 0.85;
        let r0 = 0.075 * (1.0 + d) / (1.0 - d / 2.0 - d * d / 2.0);
        assert!((c[0] - r0).abs() < 1e-12 && c[0] > c[1]);
        for seed in 0..20 {
            let r = random_binary(5, 4, 2, seed);
            let s = pagerank(&r, 0.85).unwrap().scores;
            assert_distribution(&s);
        }
        assert!(pagerank(&fix_a(), 1.0).is_err());
    }

    #[test]
    fn pagerank_matches_power_iteration() {
        let p = win_prob_matrix(&fix_a()).unwrap();
        let exact = pagerank_from_probs(&p, 0.85).unwrap();
        let l = 3;
        let mut r = vec![1.0 / 3.0; 3];
        for _ in 0..2000 {
            let mut next = vec![0.15 / 3.0; 3];
            for j in 0..l {
                let col: f64 = (0..l).filter(|&k| k != j).map(|k| p.probs[k][j]).sum();
                for i in 0..l {
                    if i != j {
                        next[i] += 0.85 * p.probs[i][j] / col * r[j];
                    }
                }
            }
            r = next;
        }
        for (a, b) in exact.iter().zip(&r) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn spectral_cases() {
        let fb = spectral(&fix_b(3, 2, 2), DEFAULT_SPECTRAL_ITER, DEFAULT_TOL).unwrap();
        assert!(uniform(&fb.scores.scores) && fb.converged);
        let fc = spectral(&fix_c(2, 2), DEFAULT_SPECTRAL_ITER, DEFAULT_TOL).unwrap();
        assert!((fc.scores.scores[0] - 1.0).abs() < 1e-12);
        let fa = spectral(&fix_a(), DEFAULT_SPECTRAL_ITER, DEFAULT_TOL).unwrap();
        assert_distribution(&fa.scores.scores);
        assert!(fa.converged);
        // eigen-equation check
        let p = win_prob_matrix(&fix_a()).unwrap();
        let v = &fa.scores.scores;
        let wv: Vec<f64> = (0..3)
            .map(|i| {
                let row: f64 = (0..3).filter(|&j| j != i).map(|j| p.probs[i][j]).sum();
                row * v[i]
                    + (0..3)
                        .filter(|&j| j != i)
                        .map(|j| p.probs[i][j] * v[j])
                        .sum::<f64>()
            })
            .collect();
        let lambda = wv.iter().sum::<f64>();
        for i in 0..3 {
            assert!((wv[i] - lambda * v[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_centrality_cases() {
        let fc = rank_centrality(&fix_c(3, 1), &RankCentralityOptions::default()).unwrap();
        assert_eq!(fc.scores, vec![1.0, 0.0]);
        let fb = rank_centrality(&fix_b(4, 2, 2), &RankCentralityOptions::default()).unwrap();
        assert!(uniform(&fb.scores));
        for seed in 0..30 {
            let c = pairwise_counts(&random_binary(5, 4, 2, seed)).unwrap();
            for opts in [
                RankCentralityOptions::default(),
                RankCentralityOptions {
                    tie_handling: TieHandling::Ignore,
                    smoothing: 0.5,
                    teleport: 0.1,
                },
            ] {
                let chain = rank_centrality_chain(&c, &opts).unwrap();
                let pi = stationary(&chain).unwrap();
                assert_distribution(&pi);
                assert!(stationary_residual(&pi, &chain) <= 1e-10);
            }
        }
    }

    #[test]
    fn alpharank_cases() {
        assert!((fixation_probability(0.5, 1.0, 50) - 0.02).abs() < 1e-15);
        assert!((fixation_probability(0.5 + 1e-300, 1.0, 50) - 0.02).abs() < 1e-12);
        // extreme payoffs stay finite
        let hi = fixation_probability(1.0, 1000.0, 50);
        let lo = fixation_probability(0.0, 1000.0, 50);
        assert!(hi > 0.99 && (0.0..1e-100).contains(&lo));
        assert!(uniform(&alpharank(&fix_b(4, 2, 2), 1.0, 50).unwrap().scores));
        let fc = alpharank(&fix_c(3, 2), 1.0, 50).unwrap().scores;
        assert!(fc[0] > 0.99, "{fc:?}");
        let near_zero = alpharank(&fix_a(), 1e-8, 50).unwrap().scores;
        assert!(near_zero.iter().all(|x| (x - 1.0 / 3.0).abs() <= 1e-6));
        for seed in 0..20 {
            let p = win_prob_matrix(&random_binary(4, 5, 2, seed)).unwrap();
            let chain = alpharank_chain(&p, 1.0, 50).unwrap();
            let pi = stationary(&chain).unwrap();
            assert_distribution(&pi);
            assert!(stationary_residual(&pi, &chain) <= 1e-10);
        }
    }

    #[test]
    fn nash_cases() {
        let fb = nash(&fix_b(3, 2, 2), NashScore::VsEquilibrium).unwrap();
        assert!(fb.scores.scores.iter().all(|&s| (s - 0.5).abs() < 1e-12));
        let adv = nash(&fix_b(3, 2, 2), NashScore::AdvantageVsEquilibrium).unwrap();
        assert!(adv.scores.scores.iter().all(|&s| s.abs() < 1e-12));

        let d = nash(&dominance(3), NashScore::VsEquilibrium).unwrap();
        assert!((d.equilibrium[0] - 1.0).abs() < 1e-12);
        let p = win_prob_matrix(&dominance(3)).unwrap();
        for i in 0..3 {
            assert!((d.scores.scores[i] - p.probs[i][0]).abs() < 1e-12);
        }
        assert!(d.scores.scores[0] > d.scores.scores[1] && d.scores.scores[1] > d.scores.scores[2]);

        for seed in 0..40 {
            let p = win_prob_matrix(&random_binary(5, 4, 3, seed)).unwrap();
            let fit = nash_from_probs(&p, NashScore::VsEquilibrium).unwrap();
            assert!(fit.game_value.abs() < 1e-9);
            for j in 0..5 {
                let v: f64 = (0..5)
                    .filter(|&i| i != j)
                    .map(|i| fit.equilibrium[i] * (2.0 * p.probs[i][j] - 1.0))
                    .sum();
                assert!(v >= -1e-9, "seed {seed}: {v}");
            }
        }
    }

    #[test]
    fn serial_rank_cases() {
        for cmp in [SerialComparison::ProbDiff, SerialComparison::Sign] {
            let chain = serial_rank(&dominance(4), cmp).unwrap();
            assert_eq!(chain.ranking.ranks, vec![1.0, 2.0, 3.0, 4.0]);
            let fb = serial_rank(&fix_b(4, 2, 2), cmp).unwrap();
            assert!(fb.ranking.ranks.iter().all(|&r| r == 2.5));
            assert_eq!(fb.warnings[0].kind, WarningKind::DegenerateSeriation);
        }
    }

    #[test]
    fn serial_rank_reverses_with_outcomes() {
        for seed in 0..30 {
            let r = random_binary(5, 6, 2, seed);
            let flipped =
                ResponseTensor::binary(5, 6, 2, r.as_flat().iter().map(|&v| 1 - v).collect()).unwrap();
            let a = serial_rank(&r, SerialComparison::ProbDiff).unwrap();
            let b = serial_rank(&flipped, SerialComparison::ProbDiff).unwrap();
            if !a.warnings.is_empty() {
                continue;
            }
            let c = pairwise_counts(&r).unwrap();
            let agree = |s: &[f64], sign: f64| {
                let mut n = 0i64;
                for i in 0..5 {
                    for j in 0..5 {
                        if sign * (c.wins[i][j] as f64 - c.wins[j][i] as f64) > 0.0 {
                            n += i64::from(s[i] > s[j]) - i64::from(s[i] < s[j]);
                        }
                    }
                }
                n
            };
            if agree(&a.scores.scores, 1.0) == 0 {
                continue;
            }
            for i in 0..5 {
                assert!(
                    (a.ranking.ranks[i] + b.ranking.ranks[i] - 6.0).abs() < 1e-12,
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn hodge_planted_gradient_flow() {
        let s = [0.0, 1.0, 2.0];
        let flow: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| s[j] - s[i]).collect()).collect();
        let w = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 1.0], vec![3.0, 1.0, 1.0]];
        let (fit, diag) = hodge_potential(&flow, &w).unwrap();
        for i in 0..3 {
            assert!((fit[i] - (s[i] - 1.0)).abs() < 1e-12);
        }
        assert!(diag.residual_norm < 1e-12 && diag.cyclicity < 1e-12);
    }

    #[test]
    fn hodge_cases() {
        for stat in [PairwiseStat::Binary, PairwiseStat::LogOdds] {
            for weight in [EdgeWeight::Total, EdgeWeight::Decisive, EdgeWeight::Uniform] {
                let opts = HodgeOptions {
                    stat,
                    weight,
                    ..HodgeOptions::default()
                };
                let fb = hodge_rank(&fix_b(3, 2, 2), &opts).unwrap();
                assert!(fb.scores.scores.iter().all(|s| s.abs() < 1e-12));
                for seed in 0..20 {
                    let fit = hodge_rank(&random_binary(5, 4, 2, seed), &opts).unwrap();
                    assert!(fit.scores.scores.iter().sum::<f64>().abs() < 1e-9);
                    assert!(
                        fit.diagnostics.normal_equation_error < 1e-8,
                        "{stat:?} {weight:?} {seed} {:?}",
                        fit.diagnostics
                    );
                }
                let fa = hodge_rank(&fix_a(), &opts).unwrap();
                let top = fa.scores.to_ranking().unwrap().order()[0];
                // under log-odds the 1-2 flow ln(0.5 / 3.5) outweighs model 0's narrow edge
                match (stat, weight) {
                    (PairwiseStat::LogOdds, EdgeWeight::Uniform) => assert_eq!(top, 1),
                    (PairwiseStat::Binary, _) => assert_eq!(top, 0),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn cyclic_flow_has_residual() {
        // a pure 3-cycle has no gradient component
        let flow = vec![vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]];
        let w = vec![vec![1.0; 3]; 3];
        let (s, diag) = hodge_potential(&flow, &w).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-12));
        assert!((diag.cyclicity - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn chains_have_valid_stationary_vectors(seed in 0u64..10_000, l in 2usize..7) {
            let r = random_binary(l, 3, 2, seed);
            let p = win_prob_matrix(&r).unwrap();
            for v in [
                pagerank_from_probs(&p, 0.85).unwrap(),
                spectral_from_probs(&p, DEFAULT_SPECTRAL_ITER, DEFAULT_TOL).0,
                alpharank(&r, 1.0, 50).unwrap().scores,
                rank_centrality(&r, &RankCentralityOptions::default()).unwrap().scores,
            ] {
                prop_assert!(v.iter().all(|&x| x >= 0.0));
                prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
