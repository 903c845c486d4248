//! Bradley-Terry and its tie extensions (Davidson, Rao-Kupper) fitted on pairwise counts.

use super::{
    fit, strengths, strongly_connected, Estimation, PairedFit, PairedOptions, StrengthParams, TieParam,
};
use crate::error::{RankError, Result};
use crate::numkit::{log_sigmoid, log_sum_exp, sigmoid, softplus};
use crate::ranking::ScoreVector;
use crate::tensor::PairwiseCounts;

/// Floor on Davidson's `log nu`.
const LOG_NU_FLOOR: f64 = -30.0;

fn method_id(base: &str, est: Estimation) -> String {
    match est {
        Estimation::Ml => base.to_string(),
        Estimation::Map { .. } => format!("{base}_map"),
    }
}

fn total_comparisons(c: &PairwiseCounts) -> f64 {
    let l = c.models();
    let mut s = 0u64;
    for i in 0..l {
        for j in i + 1..l {
            s += c.total(i, j);
        }
    }
    s as f64
}

/// `sum_{i != j} W_ij [theta_i - log(e^theta_i + e^theta_j)]` and its gradient.
pub fn bt_log_likelihood(c: &PairwiseCounts, theta: &[f64], grad: &mut [f64]) -> f64 {
    let l = c.models();
    grad[..l].iter_mut().for_each(|g| *g = 0.0);
    let mut ll = 0.0;
    for i in 0..l {
        for j in i + 1..l {
            let (wij, wji) = (c.wins[i][j] as f64, c.wins[j][i] as f64);
            if wij == 0.0 && wji == 0.0 {
                continue;
            }
            let d = theta[i] - theta[j];
            ll += wij * log_sigmoid(d) + wji * log_sigmoid(-d);
            let p = sigmoid(d);
            let gi = wij * (1.0 - p) - wji * p;
            grad[i] += gi;
            grad[j] -= gi;
        }
    }
    ll
}

/// Largest per-model gap between observed and expected wins at `theta`, relative to the
/// model's number of decisive comparisons.
pub fn bt_foc_residual(c: &PairwiseCounts, theta: &[f64]) -> f64 {
    let l = c.models();
    (0..l)
        .map(|i| {
            let mut expected = 0.0;
            let mut games = 0.0;
            for j in (0..l).filter(|&j| j != i) {
                let n = c.decisive(i, j) as f64;
                expected += n * sigmoid(theta[i] - theta[j]);
                games += n;
            }
            (c.total_wins(i) as f64 - expected).abs() / games.max(1.0)
        })
        .fold(0.0, f64::max)
}

fn package(id: String, models: usize, raw: super::RawFit, tie_param: Option<TieParam>, ll: f64) -> PairedFit {
    let theta = raw.x[..models].to_vec();
    PairedFit {
        scores: ScoreVector::new(id, strengths(&theta)),
        params: StrengthParams {
            log_strengths: theta,
            tie_param,
        },
        log_likelihood: ll,
        iterations: raw.iterations,
        converged: raw.converged,
        warnings: raw.warnings,
    }
}

pub fn bradley_terry(c: &PairwiseCounts, opts: &PairedOptions) -> Result<PairedFit> {
    fit_bt(c, opts, method_id("bradley_terry", opts.estimation))
}

/// Gaussian-MAP fit of the pairwise Plackett-Luce likelihood, which coincides with the
/// Bradley-Terry likelihood on two-level events.
pub fn plackett_luce_map(c: &PairwiseCounts, prior_var: f64, max_iter: usize) -> Result<PairedFit> {
    let opts = PairedOptions {
        estimation: Estimation::Map { prior_var },
        max_iter,
    };
    fit_bt(c, &opts, "plackett_luce_map".into())
}

fn fit_bt(c: &PairwiseCounts, opts: &PairedOptions, id: String) -> Result<PairedFit> {
    let l = c.models();
    let identified = strongly_connected(l, |i, j| c.wins[i][j] > 0);
    let raw = fit(
        l,
        vec![0.0; l],
        total_comparisons(c),
        opts,
        &[],
        identified,
        |x, g| bt_log_likelihood(c, x, g),
    )?;
    let mut g = vec![0.0; l];
    let ll = bt_log_likelihood(c, &raw.x, &mut g);
    Ok(package(id, l, raw, None, ll))
}

/// `(P(i wins), P(j wins), P(tie))` under Davidson's model.
pub fn davidson_probabilities(pi_i: f64, pi_j: f64, nu: f64) -> (f64, f64, f64) {
    let t = nu * (pi_i * pi_j).sqrt();
    let d = pi_i + pi_j + t;
    (pi_i / d, pi_j / d, t / d)
}

/// Davidson log-likelihood in `params = (theta_1..theta_L, log nu)` with its gradient.
pub fn davidson_log_likelihood(c: &PairwiseCounts, params: &[f64], grad: &mut [f64]) -> f64 {
    let l = c.models();
    let log_nu = params[l];
    grad[..=l].iter_mut().for_each(|g| *g = 0.0);
    let mut ll = 0.0;
    for i in 0..l {
        for j in i + 1..l {
            let (wij, wji, t) = (c.wins[i][j] as f64, c.wins[j][i] as f64, c.ties[i][j] as f64);
            let n = wij + wji + t;
            if n == 0.0 {
                continue;
            }
            let (ti, tj) = (params[i], params[j]);
            let tie_term = log_nu + 0.5 * (ti + tj);
            let log_d = log_sum_exp(&[ti, tj, tie_term]);
            ll += wij * (ti - log_d) + wji * (tj - log_d);
            if t > 0.0 {
                ll += t * (tie_term - log_d);
            }
            let pi = (ti - log_d).exp();
            let pj = (tj - log_d).exp();
            let pt = (tie_term - log_d).exp();
            grad[i] += wij + 0.5 * t - n * (pi + 0.5 * pt);
            grad[j] += wji + 0.5 * t - n * (pj + 0.5 * pt);
            grad[l] += t - n * pt;
        }
    }
    ll
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DavidsonOptions {
    pub base: PairedOptions,
    /// Apply the Gaussian prior to `log nu` as well under MAP.
    pub penalize_tie: bool,
}

impl From<PairedOptions> for DavidsonOptions {
    fn from(base: PairedOptions) -> Self {
        Self {
            base,
            penalize_tie: false,
        }
    }
}

/// Joint fit of log-strengths and the tie parameter, with `log nu = -30 + softplus(z)`.
pub fn davidson(c: &PairwiseCounts, opts: &DavidsonOptions) -> Result<PairedFit> {
    let l = c.models();
    let identified = strongly_connected(l, |i, j| c.wins[i][j] > 0 || c.ties[i][j] > 0);
    let mut x0 = vec![0.0; l + 1];
    // softplus(z) = 30 puts the start at nu = 1
    x0[l] = (-LOG_NU_FLOOR).exp_m1().ln();
    let penalized: Vec<usize> = if opts.penalize_tie { vec![l] } else { vec![] };
    let mut params = vec![0.0; l + 1];
    let mut inner = vec![0.0; l + 1];
    let raw = fit(
        l,
        x0,
        total_comparisons(c),
        &opts.base,
        &penalized,
        identified,
        |x, g| {
            params[..l].copy_from_slice(&x[..l]);
            params[l] = LOG_NU_FLOOR + softplus(x[l]);
            let ll = davidson_log_likelihood(c, &params, &mut inner);
            g[..l].copy_from_slice(&inner[..l]);
            g[l] = inner[l] * sigmoid(x[l]);
            ll
        },
    )?;
    let log_nu = LOG_NU_FLOOR + softplus(raw.x[l]);
    let mut full = raw.x[..l].to_vec();
    full.push(log_nu);
    let mut g = vec![0.0; l + 1];
    let ll = davidson_log_likelihood(c, &full, &mut g);
    let id = method_id("bradley_terry_davidson", opts.base.estimation);
    Ok(package(
        id,
        l,
        raw,
        Some(TieParam::Davidson { nu: log_nu.exp() }),
        ll,
    ))
}

/// `(P(i wins), P(j wins), P(tie))` under the Rao-Kupper model.
pub fn rao_kupper_probabilities(pi_i: f64, pi_j: f64, kappa: f64) -> (f64, f64, f64) {
    let a = pi_i + kappa * pi_j;
    let b = kappa * pi_i + pi_j;
    (pi_i / a, pi_j / b, (kappa * kappa - 1.0) * pi_i * pi_j / (a * b))
}

/// Rao-Kupper log-likelihood with fixed `kappa >= 1`. Ties are dropped when `kappa == 1`,
/// where the model reduces to Bradley-Terry.
pub fn rao_kupper_log_likelihood(c: &PairwiseCounts, kappa: f64, theta: &[f64], grad: &mut [f64]) -> f64 {
    let l = c.models();
    let lk = kappa.ln();
    let use_ties = kappa > 1.0;
    let log_tie_const = if use_ties { (kappa * kappa - 1.0).ln() } else { 0.0 };
    grad[..l].iter_mut().for_each(|g| *g = 0.0);
    let mut ll = 0.0;
    for i in 0..l {
        for j in i + 1..l {
            let (wij, wji) = (c.wins[i][j] as f64, c.wins[j][i] as f64);
            let t = if use_ties { c.ties[i][j] as f64 } else { 0.0 };
            if wij + wji + t == 0.0 {
                continue;
            }
            let (ti, tj) = (theta[i], theta[j]);
            let a = log_sum_exp(&[ti, lk + tj]);
            let b = log_sum_exp(&[lk + ti, tj]);
            ll += wij * (ti - a) + wji * (tj - b);
            if t > 0.0 {
                ll += t * (log_tie_const + ti + tj - a - b);
            }
            let ai = (ti - a).exp();
            let aj = 1.0 - ai;
            let bj = (tj - b).exp();
            let bi = 1.0 - bj;
            grad[i] += wij * (1.0 - ai) - wji * bi + t * (1.0 - ai - bi);
            grad[j] += -wij * aj + wji * (1.0 - bj) + t * (1.0 - aj - bj);
        }
    }
    ll
}

pub fn rao_kupper(c: &PairwiseCounts, tie_strength: f64, opts: &PairedOptions) -> Result<PairedFit> {
    if !(tie_strength >= 1.0 && tie_strength.is_finite()) {
        return Err(RankError::param(format!(
            "Rao-Kupper tie strength {tie_strength} must be at least 1"
        )));
    }
    let l = c.models();
    let use_ties = tie_strength > 1.0;
    let identified = strongly_connected(l, |i, j| c.wins[i][j] > 0 || (use_ties && c.ties[i][j] > 0));
    let raw = fit(
        l,
        vec![0.0; l],
        total_comparisons(c),
        opts,
        &[],
        identified,
        |x, g| rao_kupper_log_likelihood(c, tie_strength, x, g),
    )?;
    let mut g = vec![0.0; l];
    let ll = rao_kupper_log_likelihood(c, tie_strength, &raw.x, &mut g);
    let id = method_id("rao_kupper", opts.estimation);
    Ok(package(
        id,
        l,
        raw,
        Some(TieParam::RaoKupper { kappa: tie_strength }),
        ll,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_c, random_binary};
    use crate::numkit::gradient_check;
    use crate::ranking::WarningKind;
    use crate::tensor::pairwise_counts;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn argsort_desc(v: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        idx
    }

    /// Root of 2b^3 - 5b^2 - 16b - 15 on (4, 5) by bisection.
    fn fix_a_root() -> f64 {
        let f = |b: f64| 2.0 * b * b * b - 5.0 * b * b - 16.0 * b - 15.0;
        let (mut lo, mut hi) = (4.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fix_a_closed_form() {
        let c = pairwise_counts(&fix_a()).unwrap();
        let fit = bradley_terry(&c, &PairedOptions::ml()).unwrap();
        assert!(fit.converged && fit.warnings.is_empty());
        let pi = &fit.scores.scores;
        let b = fix_a_root();
        let a = 3.0 * b * b / (2.0 * b + 5.0);
        assert!((pi[1] / pi[2] - b).abs() < 1e-6, "{}", pi[1] / pi[2]);
        assert!((pi[0] / pi[2] - a).abs() < 1e-6);
        assert_eq!(argsort_desc(pi), vec![1, 0, 2]);
        assert!(bt_foc_residual(&c, &fit.params.log_strengths) < 1e-6);
        assert!(fit.params.log_strengths.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn symmetric_wins_give_equal_strengths() {
        let w = vec![vec![0, 4, 2], vec![4, 0, 7], vec![2, 7, 0]];
        let c = PairwiseCounts::from_wins(w).unwrap();
        for opts in [PairedOptions::ml(), PairedOptions::map(1.0)] {
            let fit = bradley_terry(&c, &opts).unwrap();
            for s in &fit.scores.scores {
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn separation_warns_and_stays_finite() {
        let c = pairwise_counts(&fix_c(5, 2)).unwrap();
        let fit = bradley_terry(&c, &PairedOptions::ml()).unwrap();
        assert!(fit.warnings.iter().any(|w| w.kind == WarningKind::NonConvergence));
        assert!(fit
            .params
            .log_strengths
            .iter()
            .all(|t| t.is_finite() && t.abs() <= 30.0));
        assert!(fit.scores.scores[0] > fit.scores.scores[1]);
        let map = bradley_terry(&c, &PairedOptions::map(1.0)).unwrap();
        assert!(map.warnings.is_empty());
    }

    #[test]
    fn replication_invariance() {
        let c = pairwise_counts(&random_binary(4, 10, 2, 8)).unwrap();
        let base = bradley_terry(&c, &PairedOptions::ml()).unwrap();
        for k in [2, 3] {
            let fit = bradley_terry(&c.scaled(k), &PairedOptions::ml()).unwrap();
            for (a, b) in fit.params.log_strengths.iter().zip(&base.params.log_strengths) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = pairwise_counts(&random_binary(4, 12, 3, 2)).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.5..1.5)).collect();
            let mut bt = |p: &[f64], g: &mut [f64]| bt_log_likelihood(&c, p, g);
            assert!(gradient_check(&mut bt, &x[..4], 1e-5) < 1e-4);
            let mut dv = |p: &[f64], g: &mut [f64]| davidson_log_likelihood(&c, p, g);
            assert!(gradient_check(&mut dv, &x, 1e-5) < 1e-4);
            let mut rk = |p: &[f64], g: &mut [f64]| rao_kupper_log_likelihood(&c, 1.3, p, g);
            assert!(gradient_check(&mut rk, &x[..4], 1e-5) < 1e-4);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (a, b) = (rng.random_range(0.01..10.0), rng.random_range(0.01..10.0));
            let (x, y, z) = davidson_probabilities(a, b, rng.random_range(0.0..5.0));
            assert!((x + y + z - 1.0).abs() < 1e-12);
            let (x, y, z) = rao_kupper_probabilities(a, b, rng.random_range(1.0..5.0));
            assert!((x + y + z - 1.0).abs() < 1e-12);
        }
        let (_, _, z) = rao_kupper_probabilities(2.0, 3.0, 1.0);
        assert_eq!(z, 0.0);
    }

    #[test]
    fn davidson_without_ties_matches_bt_order() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = 4;
            let mut w = vec![vec![0u64; l]; l];
            for (i, row) in w.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    if i != j {
                        *v = rng.random_range(1..20);
                    }
                }
            }
            let c = PairwiseCounts::from_wins(w).unwrap();
            let dv = davidson(&c, &DavidsonOptions::default()).unwrap();
            let bt = bradley_terry(&c, &PairedOptions::ml()).unwrap();
            assert_eq!(argsort_desc(&dv.scores.scores), argsort_desc(&bt.scores.scores));
            match dv.params.tie_param {
                Some(TieParam::Davidson { nu }) => assert!(nu < 1e-6),
                _ => panic!("missing tie parameter"),
            }
        }
    }

    #[test]
    fn davidson_all_ties_equal_strengths() {
        let c = PairwiseCounts::from_matrices(
            vec![vec![0; 3]; 3],
            vec![vec![0, 5, 5], vec![5, 0, 5], vec![5, 5, 0]],
        )
        .unwrap();
        let fit = davidson(&c, &DavidsonOptions::default()).unwrap();
        for s in &fit.scores.scores {
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rao_kupper_unit_kappa_is_bt() {
        let c = pairwise_counts(&random_binary(4, 10, 2, 1)).unwrap();
        let rk = rao_kupper(&c, 1.0, &PairedOptions::ml()).unwrap();
        let bt = bradley_terry(&c, &PairedOptions::ml()).unwrap();
        for (a, b) in rk.params.log_strengths.iter().zip(&bt.params.log_strengths) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(matches!(
            rao_kupper(&c, 0.9, &PairedOptions::ml()),
            Err(RankError::Parameter(_))
        ));
    }

    #[test]
    fn rao_kupper_fix_a_reference_fit() {
        // reference optimum from an independent BFGS fit of the same likelihood; the five
        // (1,2) ties pull model 1 down towards model 2, so model 0 comes out on top
        let c = pairwise_counts(&fix_a()).unwrap();
        let rk = rao_kupper(&c, 1.1, &PairedOptions::ml()).unwrap();
        let want = [0.41595353, 0.09592357, -0.5118771];
        for (a, b) in rk.params.log_strengths.iter().zip(want) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert_eq!(argsort_desc(&rk.scores.scores), vec![0, 1, 2]);
    }

    #[test]
    fn map_rejects_bad_prior() {
        let c = pairwise_counts(&fix_a()).unwrap();
        assert!(matches!(
            bradley_terry(&c, &PairedOptions::map(0.0)),
            Err(RankError::Parameter(_))
        ));
    }
}
