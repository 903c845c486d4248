//! Likelihood-based paired-comparison and Luce-family models.

mod mm;
mod pairwise;
mod setwise;

use serde::{Deserialize, Serialize};

pub use mm::{plackett_luce_mm, MmFit, MmOptions};
pub use pairwise::{
    bradley_terry, bt_foc_residual, bt_log_likelihood, davidson, davidson_log_likelihood,
    davidson_probabilities, plackett_luce_map, rao_kupper, rao_kupper_log_likelihood,
    rao_kupper_probabilities, DavidsonOptions,
};
pub use setwise::{
    bradley_terry_luce, btl_log_likelihood, davidson_luce, davidson_luce_log_likelihood,
    davidson_luce_log_partition, DavidsonLuceOptions,
};

use crate::error::{RankError, Result};
use crate::numkit::{center, minimize, MinimizeOptions};
use crate::ranking::{ScoreVector, Warning, WarningKind};

/// Bound on fitted log-strengths under maximum likelihood.
pub const THETA_CAP: f64 = 30.0;
pub const DEFAULT_PRIOR_VAR: f64 = 1.0;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Gradient tolerance of the scaled objective.
pub const FIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Estimation {
    Ml,
    /// Independent Gaussian prior `N(0, prior_var)` on every log-strength.
    Map {
        prior_var: f64,
    },
}

impl Estimation {
    pub fn map_default() -> Self {
        Estimation::Map {
            prior_var: DEFAULT_PRIOR_VAR,
        }
    }

    fn validate(self) -> Result<()> {
        if let Estimation::Map { prior_var } = self {
            if !(prior_var > 0.0 && prior_var.is_finite()) {
                return Err(RankError::param(format!(
                    "prior variance {prior_var} must be positive"
                )));
            }
        }
        Ok(())
    }

    fn is_ml(self) -> bool {
        matches!(self, Estimation::Ml)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedOptions {
    pub estimation: Estimation,
    pub max_iter: usize,
}

impl Default for PairedOptions {
    fn default() -> Self {
        Self {
            estimation: Estimation::Ml,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl PairedOptions {
    pub fn ml() -> Self {
        Self::default()
    }

    pub fn map(prior_var: f64) -> Self {
        Self {
            estimation: Estimation::Map { prior_var },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TieParam {
    Davidson {
        nu: f64,
    },
    RaoKupper {
        kappa: f64,
    },
    /// `delta[t - 1]` for tie orders `t = 1..=D`, with `delta[0] = 1`.
    DavidsonLuce {
        delta: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthParams {
    /// Centered log-strengths.
    pub log_strengths: Vec<f64>,
    pub tie_param: Option<TieParam>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedFit {
    /// `exp(theta)`, larger is better.
    pub scores: ScoreVector,
    pub params: StrengthParams,
    /// Data log-likelihood at the returned parameters (without any prior term).
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

/// Raw optimum of a fit before it is packaged.
struct RawFit {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
    warnings: Vec<Warning>,
}

/// Minimizes `(-loglik + prior) / scale` where the first `models` coordinates are log-strengths.
/// `loglik` writes the gradient of the log-likelihood (not its negative). Coordinates listed in
/// `penalized_extra` receive the same Gaussian penalty as the strengths.
fn fit<F>(
    models: usize,
    x0: Vec<f64>,
    scale: f64,
    opts: &PairedOptions,
    penalized_extra: &[usize],
    identified: bool,
    mut loglik: F,
) -> Result<RawFit>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    opts.estimation.validate()?;
    let scale = scale.max(1.0);
    let prior_var = match opts.estimation {
        Estimation::Ml => None,
        Estimation::Map { prior_var } => Some(prior_var),
    };
    let mut objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let ll = loglik(x, g);
        let mut f = -ll;
        for gi in g.iter_mut() {
            *gi = -*gi;
        }
        if let Some(v) = prior_var {
            for i in (0..models).chain(penalized_extra.iter().copied()) {
                f += x[i] * x[i] / (2.0 * v);
                g[i] += x[i] / v;
            }
        }
        for gi in g.iter_mut() {
            *gi /= scale;
        }
        f / scale
    };
    let res = minimize(
        &mut objective,
        &x0,
        MinimizeOptions {
            tol: FIT_TOL,
            ..MinimizeOptions::with_max_iter(opts.max_iter)
        },
    )?;
    let mut x = res.point;
    center(&mut x[..models]);
    let mut warnings = Vec::new();
    let mut clamped = false;
    for v in x[..models].iter_mut() {
        if v.abs() > THETA_CAP {
            *v = v.clamp(-THETA_CAP, THETA_CAP);
            clamped = true;
        }
    }
    if clamped {
        center(&mut x[..models]);
    }
    if opts.estimation.is_ml() && !identified {
        warnings.push(Warning::new(
            WarningKind::NonConvergence,
            "maximum-likelihood estimate does not exist (comparison graph not strongly connected); \
             returning a finite iterate",
        ));
    } else if !res.converged {
        warnings.push(Warning::new(
            WarningKind::NonConvergence,
            format!(
                "optimizer stopped after {} iterations with gradient norm {:.3e}",
                res.iterations, res.grad_norm
            ),
        ));
    } else if clamped {
        warnings.push(Warning::new(
            WarningKind::NonConvergence,
            format!("log-strengths clamped to +/-{THETA_CAP}"),
        ));
    }
    Ok(RawFit {
        x,
        iterations: res.iterations,
        converged: res.converged,
        warnings,
    })
}

fn strengths(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| t.exp()).collect()
}

/// Strong connectivity of the directed graph with an edge `i -> j` whenever `edge(i, j)`.
pub(crate) fn strongly_connected(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    if n <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let e = if forward { edge(v, w) } else { edge(w, v) };
                if w != v && e && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}
