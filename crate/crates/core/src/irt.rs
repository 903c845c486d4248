//! Item-response-theory rankers: joint 1/2/3PL fits, Rasch marginal ML with quadrature, and a
//! longitudinal model with per-model trends across trials.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{
    center, ln_binomial, log_sigmoid, log_sum_exp, minimize, normal_pdf, sigmoid, MinimizeOptions,
};
use crate::paired::{Estimation, THETA_CAP};
use crate::ranking::{ScoreVector, Warning, WarningKind};
use crate::tensor::{question_counts, ResponseTensor};

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_EM_ITER: usize = 20;
pub const DEFAULT_QUADRATURE: usize = 21;
pub const DEFAULT_MSTEP_ITER: usize = 100;
pub const DEFAULT_CREDIBLE_QUANTILE: f64 = 0.05;
pub const DEFAULT_SLOPE_PENALTY: f64 = 1.0;
/// Half-width of the ability quadrature grid.
pub const QUADRATURE_RANGE: f64 = 6.0;
/// Upper bound of the 3PL guessing parameter.
pub const GUESSING_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IrtModel {
    #[default]
    OnePl,
    TwoPl,
    ThreePl,
}

impl FromStr for IrtModel {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1pl" => Ok(Self::OnePl),
            "2pl" => Ok(Self::TwoPl),
            "3pl" => Ok(Self::ThreePl),
            other => Err(RankError::config(format!("unknown IRT model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemParams {
    /// Centered difficulties.
    pub difficulty: Vec<f64>,
    pub discrimination: Option<Vec<f64>>,
    pub guessing: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrtFit {
    /// Abilities, larger is better.
    pub scores: ScoreVector,
    pub items: ItemParams,
    /// Binomial log-likelihood of the counts at the returned parameters.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JmleOptions {
    pub model: IrtModel,
    pub estimation: Estimation,
    pub max_iter: usize,
    /// Fixed 3PL guessing level in `[0, 1)`; estimated per item when `None`.
    pub fix_guessing: Option<f64>,
}

impl Default for JmleOptions {
    fn default() -> Self {
        Self {
            model: IrtModel::OnePl,
            estimation: Estimation::Ml,
            max_iter: DEFAULT_MAX_ITER,
            fix_guessing: None,
        }
    }
}

impl JmleOptions {
    pub fn new(model: IrtModel, estimation: Estimation) -> Self {
        Self {
            model,
            estimation,
            ..Self::default()
        }
    }

    fn method_id(&self) -> String {
        let base = match self.model {
            IrtModel::OnePl => "rasch",
            IrtModel::TwoPl => "rasch_2pl",
            IrtModel::ThreePl => "rasch_3pl",
        };
        match self.estimation {
            Estimation::Ml => base.to_string(),
            Estimation::Map { .. } => format!("{base}_map"),
        }
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(0.01, 0.99);
    (p / (1.0 - p)).ln()
}

/// `ln(e^a + e^b)`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Replaces the gradient of a centered block by its projection onto the zero-sum subspace.
fn project(g: &mut [f64]) {
    center(g);
}

fn centered(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    center(&mut v);
    v
}

/// Joint xPL objective on the rows that take part in the fit. Layout of the parameter vector:
/// abilities, raw difficulties, then raw log-discriminations (2PL/3PL) and raw guessing logits
/// (3PL with free guessing). Difficulties are centered inside the objective, and so are
/// log-discriminations under ML where the scale is otherwise not identified.
struct Jmle<'a> {
    k: Vec<&'a [u32]>,
    trials: f64,
    model: IrtModel,
    fixed_c: Option<f64>,
    prior_var: Option<f64>,
    center_alpha: bool,
    questions: usize,
}

struct Unpacked {
    theta: Vec<f64>,
    b: Vec<f64>,
    alpha: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
}

impl Jmle<'_> {
    fn models(&self) -> usize {
        self.k.len()
    }

    fn has_alpha(&self) -> bool {
        self.model != IrtModel::OnePl
    }

    fn free_guessing(&self) -> bool {
        self.model == IrtModel::ThreePl && self.fixed_c.is_none()
    }

    fn dim(&self) -> usize {
        let m = self.questions;
        self.models() + m + if self.has_alpha() { m } else { 0 } + if self.free_guessing() { m } else { 0 }
    }

    fn unpack(&self, x: &[f64]) -> Unpacked {
        let (l, m) = (self.models(), self.questions);
        let theta = x[..l].to_vec();
        let b = centered(&x[l..l + m]);
        let alpha = self.has_alpha().then(|| {
            let raw = &x[l + m..l + 2 * m];
            if self.center_alpha {
                centered(raw)
            } else {
                raw.to_vec()
            }
        });
        let c = match self.model {
            IrtModel::ThreePl => Some(match self.fixed_c {
                Some(c) => vec![c; m],
                None => x[l + 2 * m..l + 3 * m]
                    .iter()
                    .map(|&g| GUESSING_MAX * sigmoid(g))
                    .collect(),
            }),
            _ => None,
        };
        Unpacked { theta, b, alpha, c }
    }

    /// Log-likelihood of the counts (without binomial coefficients) and its gradient.
    fn loglik(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (l, m) = (self.models(), self.questions);
        let p = self.unpack(x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let n = self.trials;
        let mut ll = 0.0;
        for i in 0..l {
            for j in 0..m {
                let a = p.alpha.as_ref().map_or(1.0, |al| al[j].exp());
                let z = a * (p.theta[i] - p.b[j]);
                let k = self.k[i][j] as f64;
                let s = sigmoid(z);
                let (lsz, lsmz) = (log_sigmoid(z), log_sigmoid(-z));
                let dz;
                match &p.c {
                    None => {
                        ll += k * lsz + (n - k) * lsmz;
                        dz = k - n * s;
                    }
                    Some(cv) => {
                        let c = cv[j];
                        let ln1c = (-c).ln_1p();
                        let lp = ln_add_exp(c.ln(), ln1c + lsz);
                        ll += k * lp + (n - k) * (ln1c + lsmz);
                        dz = k * (ln1c + lsz + lsmz - lp).exp() - (n - k) * s;
                        if self.free_guessing() {
                            let dc = k * (lsmz - lp).exp() - (n - k) / (1.0 - c);
                            grad[l + 2 * m + j] += dc * c * (1.0 - c / GUESSING_MAX);
                        }
                    }
                }
                grad[i] += a * dz;
                grad[l + j] -= a * dz;
                if self.has_alpha() {
                    grad[l + m + j] += z * dz;
                }
            }
        }
        project(&mut grad[l..l + m]);
        if self.has_alpha() && self.center_alpha {
            project(&mut grad[l + m..l + 2 * m]);
        }
        ll
    }

    /// Negative log-posterior (log-likelihood alone under ML), divided by the number of trials.
    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let scale = (self.models() * self.questions) as f64 * self.trials;
        let mut f = -self.loglik(x, grad);
        grad.iter_mut().for_each(|g| *g = -*g);
        if let Some(v) = self.prior_var {
            for i in 0..self.models() {
                f += x[i] * x[i] / (2.0 * v);
                grad[i] += x[i] / v;
            }
        }
        grad.iter_mut().for_each(|g| *g /= scale.max(1.0));
        f / scale.max(1.0)
    }
}

/// Binomial xPL fit by joint maximum likelihood or with a Gaussian ability prior.
///
/// Under ML, models that solved every trial (or none) have no finite ability; they are left
/// out of the fit and pinned at `+/-THETA_CAP` with a `Separation` warning.
pub fn rasch_jmle(r: &ResponseTensor, opts: &JmleOptions) -> Result<IrtFit> {
    let id = opts.method_id();
    r.require_binary(&id)?;
    if let Estimation::Map { prior_var } = opts.estimation {
        if !(prior_var > 0.0 && prior_var.is_finite()) {
            return Err(RankError::param(format!(
                "prior variance {prior_var} must be positive"
            )));
        }
    }
    if let Some(c) = opts.fix_guessing {
        if !(0.0..1.0).contains(&c) {
            return Err(RankError::param(format!("guessing level {c} must lie in [0, 1)")));
        }
    }
    let qc = question_counts(r)?;
    let (l, m, n) = (r.models(), r.questions(), qc.trials);
    let full = m as u32 * n;
    let ml = matches!(opts.estimation, Estimation::Ml);
    let mut warnings = Vec::new();
    let mut pinned = vec![None; l];
    if ml {
        for (i, row) in qc.counts.iter().enumerate() {
            let total: u32 = row.iter().sum();
            if total == 0 {
                pinned[i] = Some(-THETA_CAP);
            } else if total == full {
                pinned[i] = Some(THETA_CAP);
            }
        }
        let sep: Vec<usize> = (0..l).filter(|&i| pinned[i].is_some()).collect();
        if !sep.is_empty() {
            warnings.push(Warning::new(
                WarningKind::Separation,
                format!(
                    "models {sep:?} solved all or none of their trials; abilities clamped to +/-{THETA_CAP}"
                ),
            ));
        }
    }
    let active: Vec<usize> = (0..l).filter(|&i| pinned[i].is_none()).collect();
    let problem = Jmle {
        k: active.iter().map(|&i| qc.counts[i].as_slice()).collect(),
        trials: n as f64,
        model: opts.model,
        fixed_c: opts.fix_guessing,
        prior_var: match opts.estimation {
            Estimation::Ml => None,
            Estimation::Map { prior_var } => Some(prior_var),
        },
        center_alpha: ml,
        questions: m,
    };

    let mut x0 = vec![0.0; problem.dim()];
    for (slot, &i) in active.iter().enumerate() {
        let acc = qc.counts[i].iter().sum::<u32>() as f64 / full as f64;
        x0[slot] = logit(acc);
    }
    for j in 0..m {
        let solved: u32 = qc.counts.iter().map(|row| row[j]).sum();
        x0[active.len() + j] = -logit(solved as f64 / (l as f64 * n as f64));
    }
    // guessing logits start at 0, i.e. c = 0.25; log-discriminations at 0, i.e. a = 1

    let (x, iterations, converged, grad_norm) = if active.is_empty() {
        (x0, 0, true, 0.0)
    } else {
        let mut obj = |x: &[f64], g: &mut [f64]| problem.objective(x, g);
        let res = minimize(&mut obj, &x0, MinimizeOptions::with_max_iter(opts.max_iter))?;
        (res.point, res.iterations, res.converged, res.grad_norm)
    };
    if !converged {
        warnings.push(Warning::new(
            WarningKind::NonConvergence,
            format!("optimizer stopped after {iterations} iterations with gradient norm {grad_norm:.3e}"),
        ));
    }
    let mut scratch = vec![0.0; x.len()];
    let fitted = problem.unpack(&x);
    let log_likelihood = if active.is_empty() {
        0.0
    } else {
        problem.loglik(&x, &mut scratch)
    };
    let mut scores = vec![0.0; l];
    let mut clamped = false;
    for (slot, &i) in active.iter().enumerate() {
        let t = fitted.theta[slot];
        if t.abs() > THETA_CAP {
            clamped = true;
        }
        scores[i] = t.clamp(-THETA_CAP, THETA_CAP);
    }
    for i in 0..l {
        if let Some(v) = pinned[i] {
            scores[i] = v;
        }
    }
    if clamped {
        warnings.push(Warning::new(
            WarningKind::Separation,
            format!("abilities clamped to +/-{THETA_CAP}"),
        ));
    }
    Ok(IrtFit {
        scores: ScoreVector::new(id, scores),
        items: ItemParams {
            difficulty: fitted.b,
            discrimination: fitted.alpha.map(|a| a.iter().map(|v| v.exp()).collect()),
            guessing: fitted.c,
        },
        log_likelihood,
        iterations,
        converged,
        warnings,
    })
}

/// Discrete posterior over the ability quadrature grid, one row per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityPosterior {
    pub quad_points: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl AbilityPosterior {
    pub fn mean(&self, l: usize) -> f64 {
        self.weights[l]
            .iter()
            .zip(&self.quad_points)
            .map(|(w, t)| w * t)
            .sum()
    }

    /// Smallest grid point whose posterior CDF reaches `q`.
    pub fn quantile(&self, l: usize, q: f64) -> f64 {
        let mut cdf = 0.0;
        for (w, &t) in self.weights[l].iter().zip(&self.quad_points) {
            cdf += w;
            if cdf >= q - 1e-12 {
                return t;
            }
        }
        *self.quad_points.last().expect("grid has at least three points")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmlOptions {
    pub em_iter: usize,
    pub n_quadrature: usize,
    /// Newton iterations per M-step.
    pub max_iter: usize,
    /// Score by this posterior quantile instead of the posterior mean.
    pub quantile: Option<f64>,
}

impl Default for MmlOptions {
    fn default() -> Self {
        Self {
            em_iter: DEFAULT_EM_ITER,
            n_quadrature: DEFAULT_QUADRATURE,
            max_iter: DEFAULT_MSTEP_ITER,
            quantile: None,
        }
    }
}

impl MmlOptions {
    pub fn credible() -> Self {
        Self {
            quantile: Some(DEFAULT_CREDIBLE_QUANTILE),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmlFit {
    pub scores: ScoreVector,
    pub items: ItemParams,
    pub posterior: AbilityPosterior,
    /// Marginal log-likelihood before the first and after every EM iteration.
    pub em_trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Uniform grid on `[-6, 6]` with standard-normal weights normalized to one.
pub fn quadrature(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if points < 3 {
        return Err(RankError::param(format!(
            "quadrature needs at least 3 points, got {points}"
        )));
    }
    let step = 2.0 * QUADRATURE_RANGE / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|q| -QUADRATURE_RANGE + step * q as f64).collect();
    let raw: Vec<f64> = grid.iter().map(|&t| normal_pdf(t)).collect();
    let total: f64 = raw.iter().sum();
    Ok((grid, raw.into_iter().map(|w| w / total).collect()))
}

struct MmlData<'a> {
    k: &'a [Vec<u32>],
    trials: u32,
    grid: Vec<f64>,
    log_prior: Vec<f64>,
    /// `sum_m ln C(N, k_lm)` per model.
    log_coef: Vec<f64>,
}

impl MmlData<'_> {
    /// Posterior weights and the marginal log-likelihood.
    fn e_step(&self, b: &[f64]) -> (Vec<Vec<f64>>, f64) {
        let n = self.trials as f64;
        let mut total = 0.0;
        let weights = self
            .k
            .iter()
            .enumerate()
            .map(|(l, row)| {
                let logs: Vec<f64> = self
                    .grid
                    .iter()
                    .zip(&self.log_prior)
                    .map(|(&t, &lw)| {
                        let ll: f64 = row
                            .iter()
                            .zip(b)
                            .map(|(&k, &bm)| {
                                let k = k as f64;
                                k * log_sigmoid(t - bm) + (n - k) * log_sigmoid(bm - t)
                            })
                            .sum();
                        ll + lw
                    })
                    .collect();
                let norm = log_sum_exp(&logs);
                total += norm + self.log_coef[l];
                logs.iter().map(|v| (v - norm).exp()).collect()
            })
            .collect();
        (weights, total)
    }

    /// Expected complete-data log-likelihood of each item, with first and second derivatives in `b_m`.
    fn item_terms(&self, w: &[Vec<f64>], b: &[f64]) -> Vec<(f64, f64, f64)> {
        let n = self.trials as f64;
        b.iter()
            .enumerate()
            .map(|(j, &bm)| {
                let (mut q, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for (row, wl) in self.k.iter().zip(w) {
                    let k = row[j] as f64;
                    for (&t, &wq) in self.grid.iter().zip(wl) {
                        if wq == 0.0 {
                            continue;
                        }
                        let s = sigmoid(t - bm);
                        q += wq * (k * log_sigmoid(t - bm) + (n - k) * log_sigmoid(bm - t));
                        d1 += wq * (n * s - k);
                        d2 -= wq * n * s * (1.0 - s);
                    }
                }
                (q, d1, d2)
            })
            .collect()
    }

    /// Maximizes the expected complete-data log-likelihood over zero-sum difficulties by
    /// projected Newton steps with backtracking; never returns a point worse than `b`.
    fn m_step(&self, w: &[Vec<f64>], b: &mut [f64], max_iter: usize) {
        let total = |terms: &[(f64, f64, f64)]| terms.iter().map(|t| t.0).sum::<f64>();
        let mut terms = self.item_terms(w, b);
        let mut value = total(&terms);
        for _ in 0..max_iter {
            let h: Vec<f64> = terms.iter().map(|t| (-t.2).max(1e-12)).collect();
            let g: Vec<f64> = terms.iter().map(|t| t.1).collect();
            let mu =
                g.iter().zip(&h).map(|(g, h)| g / h).sum::<f64>() / h.iter().map(|h| 1.0 / h).sum::<f64>();
            let mut step: Vec<f64> = g.iter().zip(&h).map(|(g, h)| (g - mu) / h).collect();
            let largest = step.iter().fold(0.0f64, |a, s| a.max(s.abs()));
            if largest < 1e-10 {
                break;
            }
            if largest > 5.0 {
                step.iter_mut().for_each(|s| *s *= 5.0 / largest);
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = b.iter().zip(&step).map(|(b, s)| b + t * s).collect();
                let trial_terms = self.item_terms(w, &trial);
                let v = total(&trial_terms);
                if v >= value {
                    b.copy_from_slice(&trial);
                    terms = trial_terms;
                    value = v;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
}

/// Rasch marginal maximum likelihood by EM under a standard-normal ability population,
/// scored by posterior mean or by a posterior quantile.
pub fn rasch_mml(r: &ResponseTensor, opts: &MmlOptions) -> Result<MmlFit> {
    let id = if opts.quantile.is_some() {
        "rasch_mml_credible"
    } else {
        "rasch_mml"
    };
    r.require_binary(id)?;
    if let Some(q) = opts.quantile {
        if !(q > 0.0 && q < 1.0) {
            return Err(RankError::param(format!("quantile {q} must lie in (0, 1)")));
        }
    }
    let (grid, wq) = quadrature(opts.n_quadrature)?;
    let qc = question_counts(r)?;
    let (l, m, n) = (r.models(), r.questions(), qc.trials);
    let data = MmlData {
        k: &qc.counts,
        trials: n,
        grid: grid.clone(),
        log_prior: wq.iter().map(|w| w.ln()).collect(),
        log_coef: qc
            .counts
            .iter()
            .map(|row| row.iter().map(|&k| ln_binomial(n as u64, k as u64)).sum())
            .collect(),
    };
    let mut b: Vec<f64> = (0..m)
        .map(|j| {
            let solved: u32 = qc.counts.iter().map(|row| row[j]).sum();
            -logit(solved as f64 / (l as f64 * n as f64))
        })
        .collect();
    center(&mut b);

    let (mut w, ll0) = data.e_step(&b);
    let mut em_trace = vec![ll0];
    for _ in 0..opts.em_iter {
        data.m_step(&w, &mut b, opts.max_iter);
        // the M-step keeps sum(b) = 0 up to rounding
        center(&mut b);
        let (next, ll) = data.e_step(&b);
        w = next;
        em_trace.push(ll);
    }
    let posterior = AbilityPosterior {
        quad_points: grid,
        weights: w,
    };
    let scores = (0..l)
        .map(|i| match opts.quantile {
            Some(q) => posterior.quantile(i, q),
            None => posterior.mean(i),
        })
        .collect();
    Ok(MmlFit {
        scores: ScoreVector::new(id, scores),
        items: ItemParams {
            difficulty: b,
            discrimination: None,
            guessing: None,
        },
        posterior,
        em_trace,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicVariant {
    /// Ranked by ability at the middle of the trial axis, `theta0 + theta1 * mean(t)`.
    #[default]
    Linear,
    /// Ranked by the baseline `theta0`.
    Growth,
}

impl FromStr for DynamicVariant {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "growth" => Ok(Self::Growth),
            other => Err(RankError::config(format!(
                "unknown dynamic IRT variant `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicOptions {
    pub variant: DynamicVariant,
    pub max_iter: usize,
    /// Ridge weight on the slopes.
    pub slope_penalty: f64,
}

impl Default for DynamicOptions {
    fn default() -> Self {
        Self {
            variant: DynamicVariant::Linear,
            max_iter: DEFAULT_MAX_ITER,
            slope_penalty: DEFAULT_SLOPE_PENALTY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicFit {
    pub scores: ScoreVector,
    pub baseline: Vec<f64>,
    pub slopes: Vec<f64>,
    pub items: ItemParams,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

/// Longitudinal Rasch objective over the rows `rows`; parameters are baselines, slopes,
/// then raw (centered inside) difficulties.
struct Dynamic<'a> {
    r: &'a ResponseTensor,
    rows: Vec<usize>,
    times: Vec<f64>,
    penalty: f64,
}

impl Dynamic<'_> {
    fn loglik(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let l = self.rows.len();
        let m = self.r.questions();
        let b = centered(&x[2 * l..2 * l + m]);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut ll = 0.0;
        for (slot, &row) in self.rows.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                for (t_idx, &t) in self.times.iter().enumerate() {
                    let z = x[slot] + x[l + slot] * t - bj;
                    let y = self.r.get(row, j, t_idx) as f64;
                    ll += if y > 0.0 { log_sigmoid(z) } else { log_sigmoid(-z) };
                    let d = y - sigmoid(z);
                    grad[slot] += d;
                    grad[l + slot] += d * t;
                    grad[2 * l + j] -= d;
                }
            }
        }
        project(&mut grad[2 * l..]);
        ll
    }

    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let l = self.rows.len();
        let scale = (l * self.r.questions() * self.times.len()).max(1) as f64;
        let mut f = -self.loglik(x, grad);
        grad.iter_mut().for_each(|g| *g = -*g);
        for s in 0..l {
            f += self.penalty * x[l + s] * x[l + s];
            grad[l + s] += 2.0 * self.penalty * x[l + s];
        }
        grad.iter_mut().for_each(|g| *g /= scale);
        f / scale
    }
}

/// `P(R_lmn = 1) = sigmoid(theta0_l + theta1_l * t_n - b_m)` with `t_n = n / (N - 1)` and a
/// ridge penalty on the slopes. With one trial per question it falls back to the 1PL fit.
pub fn dynamic_irt(r: &ResponseTensor, opts: &DynamicOptions) -> Result<DynamicFit> {
    let id = match opts.variant {
        DynamicVariant::Linear => "dynamic_irt_linear",
        DynamicVariant::Growth => "dynamic_irt_growth",
    };
    r.require_binary(id)?;
    if !(opts.slope_penalty >= 0.0 && opts.slope_penalty.is_finite()) {
        return Err(RankError::param(format!(
            "slope penalty {} must be non-negative",
            opts.slope_penalty
        )));
    }
    let (l, m, n) = (r.models(), r.questions(), r.trials());
    if n < 2 {
        let fit = rasch_jmle(
            r,
            &JmleOptions {
                max_iter: opts.max_iter,
                ..JmleOptions::default()
            },
        )?;
        let mut warnings = vec![Warning::new(
            WarningKind::Fallback,
            "a single trial carries no time axis; fitted the 1PL model instead",
        )];
        warnings.extend(fit.warnings);
        return Ok(DynamicFit {
            scores: ScoreVector::new(id, fit.scores.scores.clone()),
            baseline: fit.scores.scores,
            slopes: vec![0.0; l],
            items: fit.items,
            converged: fit.converged,
            warnings,
        });
    }
    let totals = r.success_totals()?;
    let full = (m * n) as u64;
    let mut warnings = Vec::new();
    let pinned: Vec<Option<f64>> = totals
        .iter()
        .map(|&t| match t {
            0 => Some(-THETA_CAP),
            t if t == full => Some(THETA_CAP),
            _ => None,
        })
        .collect();
    let sep: Vec<usize> = (0..l).filter(|&i| pinned[i].is_some()).collect();
    if !sep.is_empty() {
        warnings.push(Warning::new(
            WarningKind::Separation,
            format!("models {sep:?} solved all or none of their trials; baselines clamped to +/-{THETA_CAP}"),
        ));
    }
    let rows: Vec<usize> = (0..l).filter(|&i| pinned[i].is_none()).collect();
    let problem = Dynamic {
        r,
        rows: rows.clone(),
        times: (0..n).map(|t| t as f64 / (n - 1) as f64).collect(),
        penalty: opts.slope_penalty,
    };
    let a = rows.len();
    let mut x0 = vec![0.0; 2 * a + m];
    for (slot, &i) in rows.iter().enumerate() {
        x0[slot] = logit(totals[i] as f64 / full as f64);
    }
    for j in 0..m {
        let solved: usize = (0..l)
            .map(|i| r.cell(i, j).iter().filter(|&&v| v == 1).count())
            .sum();
        x0[2 * a + j] = -logit(solved as f64 / (l * n) as f64);
    }
    let (x, converged) = if a == 0 {
        (x0, true)
    } else {
        let mut obj = |x: &[f64], g: &mut [f64]| problem.objective(x, g);
        let res = minimize(&mut obj, &x0, MinimizeOptions::with_max_iter(opts.max_iter))?;
        if !res.converged {
            warnings.push(Warning::new(
                WarningKind::NonConvergence,
                format!(
                    "optimizer stopped after {} iterations with gradient norm {:.3e}",
                    res.iterations, res.grad_norm
                ),
            ));
        }
        (res.point, res.converged)
    };
    let mut baseline = vec![0.0; l];
    let mut slopes = vec![0.0; l];
    for (slot, &i) in rows.iter().enumerate() {
        baseline[i] = x[slot].clamp(-THETA_CAP, THETA_CAP);
        slopes[i] = x[a + slot];
    }
    for i in 0..l {
        if let Some(v) = pinned[i] {
            baseline[i] = v;
        }
    }
    let mean_t = 0.5;
    let scores = match opts.variant {
        DynamicVariant::Growth => baseline.clone(),
        DynamicVariant::Linear => baseline
            .iter()
            .zip(&slopes)
            .map(|(b, s)| b + s * mean_t)
            .collect(),
    };
    Ok(DynamicFit {
        scores: ScoreVector::new(id, scores),
        baseline,
        slopes,
        items: ItemParams {
            difficulty: centered(&x[2 * a..2 * a + m]),
            discrimination: None,
            guessing: None,
        },
        converged,
        warnings,
    })
}

/// A differentiable IRT objective that owns its data, for derivative checks and diagnostics.
/// Values and gradients are those minimized by the corresponding fitters.
pub struct IrtObjective {
    kind: ObjectiveKind,
}

enum ObjectiveKind {
    Joint {
        counts: Vec<Vec<u32>>,
        trials: u32,
        model: IrtModel,
        prior_var: Option<f64>,
    },
    Dynamic {
        r: ResponseTensor,
        penalty: f64,
    },
    MStep {
        counts: Vec<Vec<u32>>,
        trials: u32,
        grid: Vec<f64>,
        log_prior: Vec<f64>,
        weights: Vec<Vec<f64>>,
    },
}

impl IrtObjective {
    /// Joint xPL negative log-likelihood (ML) or negative log-posterior (MAP) over all models.
    pub fn joint(r: &ResponseTensor, model: IrtModel, estimation: Estimation) -> Result<Self> {
        r.require_binary("irt")?;
        let qc = question_counts(r)?;
        let prior_var = match estimation {
            Estimation::Ml => None,
            Estimation::Map { prior_var } => Some(prior_var),
        };
        Ok(Self {
            kind: ObjectiveKind::Joint {
                counts: qc.counts,
                trials: qc.trials,
                model,
                prior_var,
            },
        })
    }

    /// Penalized longitudinal objective over all models; needs at least two trials.
    pub fn dynamic(r: &ResponseTensor, slope_penalty: f64) -> Result<Self> {
        r.require_binary("dynamic_irt")?;
        if r.trials() < 2 {
            return Err(RankError::param(
                "the longitudinal objective needs at least 2 trials",
            ));
        }
        Ok(Self {
            kind: ObjectiveKind::Dynamic {
                r: r.clone(),
                penalty: slope_penalty,
            },
        })
    }

    /// Negated expected complete-data log-likelihood of the Rasch MML M-step, with posterior
    /// weights taken from an E-step at difficulties `at`.
    pub fn mml_m_step(r: &ResponseTensor, n_quadrature: usize, at: &[f64]) -> Result<Self> {
        r.require_binary("rasch_mml")?;
        if at.len() != r.questions() {
            return Err(RankError::DimensionMismatch(format!(
                "{} difficulties for {} questions",
                at.len(),
                r.questions()
            )));
        }
        let (grid, wq) = quadrature(n_quadrature)?;
        let qc = question_counts(r)?;
        let log_prior: Vec<f64> = wq.iter().map(|w| w.ln()).collect();
        let data = MmlData {
            k: &qc.counts,
            trials: qc.trials,
            grid: grid.clone(),
            log_prior: log_prior.clone(),
            log_coef: vec![0.0; qc.counts.len()],
        };
        let (weights, _) = data.e_step(at);
        Ok(Self {
            kind: ObjectiveKind::MStep {
                counts: qc.counts,
                trials: qc.trials,
                grid,
                log_prior,
                weights,
            },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ObjectiveKind::Joint {
                counts,
                trials,
                model,
                prior_var,
            } => joint_problem(counts, *trials, *model, *prior_var).dim(),
            ObjectiveKind::Dynamic { r, .. } => 2 * r.models() + r.questions(),
            ObjectiveKind::MStep { counts, .. } => counts.first().map_or(0, Vec::len),
        }
    }

    /// Objective value at `x`; the gradient is written to `grad`.
    pub fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match &self.kind {
            ObjectiveKind::Joint {
                counts,
                trials,
                model,
                prior_var,
            } => joint_problem(counts, *trials, *model, *prior_var).objective(x, grad),
            ObjectiveKind::Dynamic { r, penalty } => {
                let n = r.trials();
                let problem = Dynamic {
                    r,
                    rows: (0..r.models()).collect(),
                    times: (0..n).map(|t| t as f64 / (n - 1) as f64).collect(),
                    penalty: *penalty,
                };
                problem.objective(x, grad)
            }
            ObjectiveKind::MStep {
                counts,
                trials,
                grid,
                log_prior,
                weights,
            } => {
                let data = MmlData {
                    k: counts,
                    trials: *trials,
                    grid: grid.clone(),
                    log_prior: log_prior.clone(),
                    log_coef: Vec::new(),
                };
                let terms = data.item_terms(weights, x);
                for (g, t) in grad.iter_mut().zip(&terms) {
                    *g = -t.1;
                }
                -terms.iter().map(|t| t.0).sum::<f64>()
            }
        }
    }
}

fn joint_problem(counts: &[Vec<u32>], trials: u32, model: IrtModel, prior_var: Option<f64>) -> Jmle<'_> {
    Jmle {
        k: counts.iter().map(Vec::as_slice).collect(),
        trials: trials as f64,
        model,
        fixed_c: None,
        prior_var,
        center_alpha: prior_var.is_none(),
        questions: counts.first().map_or(0, Vec::len),
    }
}
