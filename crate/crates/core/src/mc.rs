//! Monte-Carlo Bayesian rankers.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`, which is
//! platform independent. Thompson sampling gives every model its own stream number so draws
//! do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{center, log_sigmoid};
use crate::ranking::{descending_average_ranks, ScoreVector};
use crate::tensor::{pairwise_counts, ResponseTensor};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_THOMPSON_SAMPLES: usize = 10_000;
pub const DEFAULT_MCMC_SAMPLES: usize = 5_000;
pub const DEFAULT_BURNIN: usize = 1_000;
pub const DEFAULT_PROPOSAL_STD: f64 = 0.1;
/// Number of batches behind the batch-means standard error.
const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThompsonOptions {
    pub n_samples: usize,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    pub seed: u64,
}

impl Default for ThompsonOptions {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_THOMPSON_SAMPLES,
            prior_alpha: 1.0,
            prior_beta: 1.0,
            seed: DEFAULT_SEED,
        }
    }
}

/// Negative mean rank of each model across draws from its Beta posterior over the pooled
/// success rate.
pub fn thompson(r: &ResponseTensor, opts: &ThompsonOptions) -> Result<ScoreVector> {
    r.require_binary("thompson")?;
    if opts.n_samples < 1 {
        return Err(RankError::param("thompson needs at least one sample"));
    }
    if !(opts.prior_alpha > 0.0 && opts.prior_beta > 0.0) {
        return Err(RankError::param(format!(
            "Beta prior ({}, {}) must be positive",
            opts.prior_alpha, opts.prior_beta
        )));
    }
    let trials = (r.questions() * r.trials()) as f64;
    let draws: Vec<Vec<f64>> = r
        .success_totals()?
        .iter()
        .enumerate()
        .map(|(l, &s)| {
            let beta = Beta::new(opts.prior_alpha + s as f64, opts.prior_beta + trials - s as f64)
                .map_err(|e| RankError::param(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(l as u64);
            Ok((0..opts.n_samples).map(|_| beta.sample(&mut rng)).collect())
        })
        .collect::<Result<_>>()?;
    let l = r.models();
    let mut rank_sum = vec![0.0; l];
    let mut column = vec![0.0; l];
    for t in 0..opts.n_samples {
        for (c, d) in column.iter_mut().zip(&draws) {
            *c = d[t];
        }
        for (acc, rk) in rank_sum.iter_mut().zip(descending_average_ranks(&column)) {
            *acc += rk;
        }
    }
    let scores = rank_sum.iter().map(|s| -s / opts.n_samples as f64).collect();
    Ok(ScoreVector::new("thompson", scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcOptions {
    /// Total sweeps, burn-in included.
    pub n_samples: usize,
    pub burnin: usize,
    pub prior_var: f64,
    pub seed: u64,
    pub proposal_std: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_MCMC_SAMPLES,
            burnin: DEFAULT_BURNIN,
            prior_var: 1.0,
            seed: DEFAULT_SEED,
            proposal_std: DEFAULT_PROPOSAL_STD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcFit {
    /// Posterior means of the centered log-strengths.
    pub scores: ScoreVector,
    pub posterior_std: Vec<f64>,
    /// Monte-Carlo standard error of each mean from non-overlapping batch means.
    pub mc_std_error: Vec<f64>,
    /// Accepted fraction of all single-coordinate proposals, burn-in included.
    pub acceptance_rate: f64,
}

/// Log-posterior of a centered log-strength vector under the Bradley-Terry likelihood of the
/// decisive wins and an isotropic Gaussian prior.
fn log_posterior(wins: &[Vec<u64>], theta: &[f64], prior_var: f64) -> f64 {
    let mut lp = -theta.iter().map(|t| t * t).sum::<f64>() / (2.0 * prior_var);
    for (i, row) in wins.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w > 0 {
                lp += w as f64 * log_sigmoid(theta[i] - theta[j]);
            }
        }
    }
    lp
}

/// Bayesian Bradley-Terry by component-wise random-walk Metropolis on the zero-sum subspace.
///
/// Each proposal moves one coordinate and re-centers the vector. The likelihood ignores a
/// common shift and the isotropic prior splits into independent centered and mean parts, so
/// this samples exactly the posterior of the centered strengths.
pub fn bayesian_mcmc_bt(r: &ResponseTensor, opts: &McmcOptions) -> Result<McmcFit> {
    r.require_binary("bayesian_mcmc")?;
    if opts.burnin >= opts.n_samples {
        return Err(RankError::param(format!(
            "burn-in {} must be smaller than the number of samples {}",
            opts.burnin, opts.n_samples
        )));
    }
    if !(opts.prior_var > 0.0 && opts.prior_var.is_finite()) {
        return Err(RankError::param(format!(
            "prior variance {} must be positive",
            opts.prior_var
        )));
    }
    if !(opts.proposal_std > 0.0 && opts.proposal_std.is_finite()) {
        return Err(RankError::param(format!(
            "proposal std {} must be positive",
            opts.proposal_std
        )));
    }
    let wins = pairwise_counts(r)?.wins;
    let l = r.models();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut theta = vec![0.0; l];
    let mut current = log_posterior(&wins, &theta, opts.prior_var);
    let mut proposal = vec![0.0; l];
    let (mut sum, mut sum_sq) = (vec![0.0; l], vec![0.0; l]);
    let kept = opts.n_samples - opts.burnin;
    let batches = BATCHES.min(kept);
    let batch_len = kept / batches;
    let mut batch_sums = vec![vec![0.0; l]; batches];
    let (mut accepted, mut proposed) = (0usize, 0usize);
    for sweep in 0..opts.n_samples {
        for k in 0..l {
            let step: f64 = rng.sample(StandardNormal);
            proposal.copy_from_slice(&theta);
            proposal[k] += opts.proposal_std * step;
            center(&mut proposal);
            let candidate = log_posterior(&wins, &proposal, opts.prior_var);
            let u: f64 = rng.random();
            proposed += 1;
            if u.ln() < candidate - current {
                theta.copy_from_slice(&proposal);
                current = candidate;
                accepted += 1;
            }
        }
        if sweep >= opts.burnin {
            let b = (sweep - opts.burnin) / batch_len;
            for i in 0..l {
                sum[i] += theta[i];
                sum_sq[i] += theta[i] * theta[i];
                if b < batches {
                    batch_sums[b][i] += theta[i];
                }
            }
        }
    }
    let mc_std_error = (0..l)
        .map(|i| {
            if batches < 2 {
                return f64::NAN;
            }
            let means: Vec<f64> = batch_sums.iter().map(|bs| bs[i] / batch_len as f64).collect();
            let m = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
            (var / batches as f64).sqrt()
        })
        .collect();
    let kept = kept as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / kept).collect();
    let posterior_std = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| (sq / kept - m * m).max(0.0).sqrt())
        .collect();
    Ok(McmcFit {
        scores: ScoreVector::new("bayesian_mcmc", mean),
        posterior_std,
        mc_std_error,
        acceptance_rate: if proposed == 0 {
            0.0
        } else {
            accepted as f64 / proposed as f64
        },
    })
}
