//! Metric-based rankers: mean accuracy, inverse-difficulty weighting, the Pass@k family and
//! the Dirichlet-multinomial Bayes estimator.

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{ln_binomial, normal_inv_cdf};
use crate::ranking::ScoreVector;
use crate::tensor::{question_counts, solve_rates, PriorOutcomes, QuestionCounts, ResponseTensor};

pub const DEFAULT_K: usize = 2;
pub const DEFAULT_CI_QUANTILE: f64 = 0.05;

/// Mean accuracy over all questions and trials, from integer totals and one division, so
/// replicated data scores bit-identically.
pub fn avg(r: &ResponseTensor) -> Result<ScoreVector> {
    r.require_binary("avg")?;
    let cells = (r.questions() * r.trials()) as f64;
    let scores = r
        .success_totals()?
        .into_iter()
        .map(|s| s as f64 / cells)
        .collect();
    Ok(ScoreVector::new("avg", scores))
}

/// Accuracy with each question weighted by the inverse of its (clipped) global solve rate.
pub fn inverse_difficulty(r: &ResponseTensor, clip: (f64, f64)) -> Result<ScoreVector> {
    r.require_binary("inverse_difficulty")?;
    let (lo, hi) = clip;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(RankError::config(format!(
            "clip range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"
        )));
    }
    let rates = solve_rates(r)?.rates;
    let (models, questions) = (r.models(), r.questions());
    let weights: Vec<f64> = (0..questions)
        .map(|m| {
            let p = (0..models).map(|l| rates[l][m]).sum::<f64>() / models as f64;
            1.0 / p.clamp(lo, hi)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let scores = rates
        .iter()
        .map(|row| row.iter().zip(&weights).map(|(p, w)| p * w).sum::<f64>() / total)
        .collect();
    Ok(ScoreVector::new("inverse_difficulty", scores))
}

/// `P(X = j)` for `X ~ Hypergeom(population, successes, draws)`.
pub fn hypergeom_pmf(population: u64, successes: u64, draws: u64, j: u64) -> f64 {
    if j > draws || j > successes || draws - j > population - successes {
        return 0.0;
    }
    (ln_binomial(successes, j) + ln_binomial(population - successes, draws - j)
        - ln_binomial(population, draws))
    .exp()
}

/// `1 - C(N-nu, k) / C(N, k)` as a running product.
pub fn pass_at_k_single(trials: u64, successes: u64, k: u64) -> f64 {
    let failures = trials - successes;
    if failures < k {
        return 1.0;
    }
    let mut ratio = 1.0;
    for i in 0..k {
        ratio *= (failures - i) as f64 / (trials - i) as f64;
    }
    1.0 - ratio
}

/// `C(nu, k) / C(N, k)` as a running product.
pub fn pass_hat_k_single(trials: u64, successes: u64, k: u64) -> f64 {
    if successes < k {
        return 0.0;
    }
    let mut ratio = 1.0;
    for i in 0..k {
        ratio *= (successes - i) as f64 / (trials - i) as f64;
    }
    ratio
}

/// Success threshold `ceil(tau * k)`, with a small slack so that e.g. `0.3 * 10` gives 3.
pub fn g_pass_threshold(k: u64, tau: f64) -> u64 {
    (tau * k as f64 - 1e-9).ceil().max(0.0) as u64
}

pub fn g_pass_single(trials: u64, successes: u64, k: u64, tau: f64) -> f64 {
    let j0 = g_pass_threshold(k, tau);
    if j0 >= k && j0 > 0 {
        pass_hat_k_single(trials, successes, k)
    } else if j0 <= 1 {
        pass_at_k_single(trials, successes, k)
    } else {
        (j0..=k)
            .map(|j| hypergeom_pmf(trials, successes, k, j))
            .sum::<f64>()
            .min(1.0)
    }
}

pub fn mg_pass_single(trials: u64, successes: u64, k: u64) -> f64 {
    let m0 = k.div_ceil(2);
    let expectation: f64 = (m0 + 1..=k)
        .map(|j| (j - m0) as f64 * hypergeom_pmf(trials, successes, k, j))
        .sum();
    2.0 / k as f64 * expectation
}

fn check_k(r: &ResponseTensor, k: usize, min_k: usize) -> Result<()> {
    if k < min_k || k > r.trials() {
        return Err(RankError::param(format!(
            "k = {k} must lie in [{min_k}, N = {}]",
            r.trials()
        )));
    }
    Ok(())
}

fn per_question_mean(r: &ResponseTensor, method: &str, f: impl Fn(u64, u64) -> f64) -> Result<ScoreVector> {
    r.require_binary(method)?;
    let QuestionCounts { counts, trials } = question_counts(r)?;
    let scores = counts
        .iter()
        .map(|row| row.iter().map(|&c| f(trials as u64, c as u64)).sum::<f64>() / row.len() as f64)
        .collect();
    Ok(ScoreVector::new(method, scores))
}

pub fn pass_at_k(r: &ResponseTensor, k: usize) -> Result<ScoreVector> {
    check_k(r, k, 1)?;
    per_question_mean(r, "pass_at_k", |n, c| pass_at_k_single(n, c, k as u64))
}

pub fn pass_hat_k(r: &ResponseTensor, k: usize) -> Result<ScoreVector> {
    check_k(r, k, 1)?;
    per_question_mean(r, "pass_hat_k", |n, c| pass_hat_k_single(n, c, k as u64))
}

pub fn g_pass_at_k_tau(r: &ResponseTensor, k: usize, tau: f64) -> Result<ScoreVector> {
    check_k(r, k, 1)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(RankError::param(format!("tau = {tau} must lie in [0, 1]")));
    }
    per_question_mean(r, "g_pass_at_k_tau", |n, c| g_pass_single(n, c, k as u64, tau))
}

pub fn mg_pass_at_k(r: &ResponseTensor, k: usize) -> Result<ScoreVector> {
    check_k(r, k, 2)?;
    per_question_mean(r, "mg_pass_at_k", |n, c| mg_pass_single(n, c, k as u64))
}

/// Posterior mean and standard deviation of the weighted score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimate {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Weights `k / C` for categories `0..=C`; `(0, 1)` for binary data.
pub fn default_weights(num_categories: usize) -> Vec<f64> {
    let c = (num_categories - 1).max(1) as f64;
    (0..num_categories).map(|k| k as f64 / c).collect()
}

/// Dirichlet-multinomial posterior of the weighted score, optionally regularized by prior
/// outcomes. Without `quantile` the score is the posterior mean; otherwise it is
/// `mean + Phi^-1(quantile) * std`.
pub fn bayes(
    r: &ResponseTensor,
    weights: &[f64],
    prior: Option<&PriorOutcomes>,
    quantile: Option<f64>,
) -> Result<(ScoreVector, BayesEstimate)> {
    let cats = r.num_categories();
    if weights.len() != cats {
        return Err(RankError::config(format!(
            "weight vector has length {} but the data has {cats} categories",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(RankError::config("weights must be finite"));
    }
    if let Some(p) = prior {
        if p.num_categories() != cats {
            return Err(RankError::config(format!(
                "prior has {} categories but the data has {cats}",
                p.num_categories()
            )));
        }
        if p.questions() != r.questions() {
            return Err(RankError::DimensionMismatch(format!(
                "prior covers {} questions but the data has {}",
                p.questions(),
                r.questions()
            )));
        }
    }
    if let Some(q) = quantile {
        if !(q > 0.0 && q < 1.0) {
            return Err(RankError::param(format!("quantile {q} must lie in (0, 1)")));
        }
    }
    let (models, questions, trials) = (r.models(), r.questions(), r.trials());
    let draws = prior.map_or(0, PriorOutcomes::draws);
    let t = (cats + draws + trials) as f64;

    // prior pseudo-counts per question and category
    let base: Vec<Vec<f64>> = (0..questions)
        .map(|m| {
            let mut c = vec![1.0; cats];
            if let Some(p) = prior {
                for &k in p.row(m) {
                    c[k as usize] += 1.0;
                }
            }
            c
        })
        .collect();

    let w0 = weights[0];
    let dw: Vec<f64> = weights.iter().map(|w| w - w0).collect();
    let mf = questions as f64;
    let mut mean = Vec::with_capacity(models);
    let mut std = Vec::with_capacity(models);
    for l in 0..models {
        let mut first = 0.0;
        let mut var = 0.0;
        for (m, prior_counts) in base.iter().enumerate() {
            let mut nu = prior_counts.clone();
            for &k in r.cell(l, m) {
                nu[k as usize] += 1.0;
            }
            let e1: f64 = nu.iter().zip(&dw).map(|(v, d)| v / t * d).sum();
            let e2: f64 = nu.iter().zip(&dw).map(|(v, d)| v / t * d * d).sum();
            first += e1;
            var += e2 - e1 * e1;
        }
        mean.push(w0 + first / mf);
        std.push((var.max(0.0) / (mf * mf * (t + 1.0))).sqrt());
    }
    let (id, scores) = match quantile {
        None => ("bayes", mean.clone()),
        Some(q) => {
            let z = normal_inv_cdf(q);
            (
                "bayes_ci",
                mean.iter().zip(&std).map(|(m, s)| m + z * s).collect(),
            )
        }
    };
    Ok((ScoreVector::new(id, scores), BayesEstimate { mean, std }))
}

/// Posterior mean with greedy-decode outcomes as the prior.
pub fn bayes_greedy(
    r: &ResponseTensor,
    weights: &[f64],
    prior: &PriorOutcomes,
) -> Result<(ScoreVector, BayesEstimate)> {
    let (s, est) = bayes(r, weights, Some(prior), None)?;
    Ok((ScoreVector::new("bayes_greedy", s.scores), est))
}

/// Conservative score at the default lower quantile.
pub fn bayes_ci(
    r: &ResponseTensor,
    weights: &[f64],
    prior: Option<&PriorOutcomes>,
) -> Result<(ScoreVector, BayesEstimate)> {
    bayes(r, weights, prior, Some(DEFAULT_CI_QUANTILE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c, random_binary};
    use crate::ranking::{scores_to_ranking, TieRule};
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Counts k-subsets of `N` trials (the first `nu` successes) with at least `need` successes.
    fn enumerate_subsets(n: u32, nu: u32, k: u32, need: u32) -> f64 {
        let mut hit = 0u32;
        let mut all = 0u32;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() != k {
                continue;
            }
            all += 1;
            if (mask & ((1 << nu) - 1)).count_ones() >= need {
                hit += 1;
            }
        }
        hit as f64 / all as f64
    }

    fn one_question(n: usize, nu: usize) -> ResponseTensor {
        let mut v = vec![1u8; nu];
        v.resize(n, 0);
        ResponseTensor::binary(1, 1, n, v).unwrap()
    }

    #[test]
    fn avg_fixtures() {
        assert!(close(&avg(&fix_a()).unwrap().scores, &[0.75, 0.625, 0.25], 1e-15));
        assert!(avg(&fix_b(2, 3, 2)).unwrap().scores.iter().all(|&s| s == 1.0));
        assert_eq!(avg(&fix_c(4, 2)).unwrap().scores, vec![1.0, 0.0]);
    }

    #[test]
    fn inverse_difficulty_hand_example() {
        // model rows p = [[1,1],[1,0]] with one trial
        let r = ResponseTensor::binary(2, 2, 1, vec![1, 1, 1, 0]).unwrap();
        let s = inverse_difficulty(&r, (0.01, 0.99)).unwrap().scores;
        let (w1, w2) = (1.0 / 0.99, 2.0);
        assert!((s[1] - w1 / (w1 + w2)).abs() < 1e-15);
        assert!((s[0] - 1.0).abs() < 1e-15);
        assert!(inverse_difficulty(&fix_b(2, 2, 1), (0.01, 0.99))
            .unwrap()
            .scores
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(matches!(
            inverse_difficulty(&r, (0.5, 0.2)),
            Err(RankError::Config(_))
        ));
    }

    #[test]
    fn pass_family_hand_values() {
        let r = one_question(5, 3);
        assert!((pass_at_k(&r, 2).unwrap().scores[0] - 0.9).abs() < 1e-15);
        assert!((pass_hat_k(&r, 2).unwrap().scores[0] - 0.3).abs() < 1e-15);
        assert!((g_pass_at_k_tau(&r, 4, 0.5).unwrap().scores[0] - 1.0).abs() < 1e-12);
        assert!((mg_pass_at_k(&r, 2).unwrap().scores[0] - 0.3).abs() < 1e-12);
        assert_eq!(pass_at_k(&one_question(4, 4), 3).unwrap().scores[0], 1.0);
        assert_eq!(pass_at_k(&one_question(4, 0), 3).unwrap().scores[0], 0.0);
        assert_eq!(pass_hat_k(&one_question(4, 1), 2).unwrap().scores[0], 0.0);
        assert!(matches!(pass_at_k(&r, 6), Err(RankError::Parameter(_))));
        assert!(matches!(pass_at_k(&r, 0), Err(RankError::Parameter(_))));
        assert!(matches!(mg_pass_at_k(&r, 1), Err(RankError::Parameter(_))));
    }

    #[test]
    fn mg_pass_all_correct() {
        for k in 2..=6u64 {
            let expected = 2.0 / k as f64 * (k - k.div_ceil(2)) as f64;
            assert!((mg_pass_single(6, 6, k) - expected).abs() < 1e-12);
            assert_eq!(mg_pass_single(6, 0, k), 0.0);
        }
    }

    #[test]
    fn g_pass_matches_subset_enumeration() {
        for n in 1..=8u32 {
            for nu in 0..=n {
                for k in 1..=n {
                    for tau in [0.0, 0.2, 0.5, 0.75, 1.0] {
                        let need = g_pass_threshold(k as u64, tau).max(1) as u32;
                        let brute = enumerate_subsets(n, nu, k, need);
                        let got = g_pass_single(n as u64, nu as u64, k as u64, tau);
                        assert!((got - brute).abs() < 1e-12, "n={n} nu={nu} k={k} tau={tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn tau_endpoints_are_exact() {
        let r = random_binary(4, 6, 7, 3);
        for k in 1..=7 {
            assert_eq!(
                g_pass_at_k_tau(&r, k, 0.0).unwrap().scores,
                pass_at_k(&r, k).unwrap().scores
            );
            assert_eq!(
                g_pass_at_k_tau(&r, k, 1.0).unwrap().scores,
                pass_hat_k(&r, k).unwrap().scores
            );
        }
    }

    #[test]
    fn k_one_is_avg() {
        let r = random_binary(3, 5, 4, 11);
        assert!(close(
            &pass_at_k(&r, 1).unwrap().scores,
            &avg(&r).unwrap().scores,
            1e-15
        ));
    }

    #[test]
    fn bayes_hand_example() {
        let r = ResponseTensor::binary(1, 1, 2, vec![1, 0]).unwrap();
        let (s, est) = bayes(&r, &[0.0, 1.0], None, None).unwrap();
        assert!((s.scores[0] - 0.5).abs() < 1e-15);
        assert!((est.std[0] - 0.05f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bayes_constant_weights() {
        let r = random_binary(3, 4, 3, 5);
        let (_, est) = bayes(&r, &[0.7, 0.7], None, None).unwrap();
        assert!(est.mean.iter().all(|&m| (m - 0.7).abs() < 1e-15));
        assert!(est.std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn bayes_validates_inputs() {
        let r = fix_a();
        assert!(matches!(bayes(&r, &[0.0], None, None), Err(RankError::Config(_))));
        assert!(matches!(
            bayes(&r, &[0.0, 1.0], None, Some(1.0)),
            Err(RankError::Parameter(_))
        ));
        let wrong = PriorOutcomes::empty(3, 2);
        assert!(matches!(
            bayes(&r, &[0.0, 1.0], Some(&wrong), None),
            Err(RankError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bayes_categorical() {
        // one model, one question, outcomes (2, 0) over three categories
        let r = ResponseTensor::new(1, 1, 2, 3, vec![2, 0]).unwrap();
        let w = [0.0, 0.5, 1.0];
        let (_, est) = bayes(&r, &w, None, None).unwrap();
        // nu = (2, 1, 2), T = 5
        let mu = (0.5 + 2.0) / 5.0;
        let e2 = (0.25 + 2.0) / 5.0;
        assert!((est.mean[0] - mu).abs() < 1e-15);
        assert!((est.std[0] - ((e2 - mu * mu) / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn greedy_prior_pulls_towards_one() {
        let r = random_binary(3, 5, 2, 9);
        let mut last = bayes(&r, &[0.0, 1.0], None, None).unwrap().1.mean;
        for d in 1..5 {
            let prior = PriorOutcomes::new(5, d, 2, vec![1; 5 * d]).unwrap();
            let mean = bayes(&r, &[0.0, 1.0], Some(&prior), None).unwrap().1.mean;
            for (a, b) in mean.iter().zip(&last) {
                assert!(a > b);
            }
            last = mean;
        }
    }

    proptest! {
        #[test]
        fn hypergeom_sums_to_one(n in 1u64..40, nu_frac in 0.0f64..=1.0, k_frac in 0.0f64..=1.0) {
            let nu = (nu_frac * n as f64).round() as u64;
            let k = ((k_frac * n as f64).round() as u64).max(1);
            let pmf: Vec<f64> = (0..=k).map(|j| hypergeom_pmf(n, nu, k, j)).collect();
            prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for j0 in 0..=k {
                let upper: f64 = pmf[j0 as usize..].iter().sum();
                let lower: f64 = pmf[..j0 as usize].iter().sum();
                prop_assert!((upper - (1.0 - lower)).abs() < 1e-12);
            }
        }

        #[test]
        fn pass_monotone_in_k(seed in 0u64..500) {
            let r = random_binary(2, 3, 6, seed);
            let mut prev_at = 0.0;
            let mut prev_hat = f64::INFINITY;
            for k in 1..=6 {
                let at = pass_at_k(&r, k).unwrap().scores[0];
                let hat = pass_hat_k(&r, k).unwrap().scores[0];
                prop_assert!(at >= prev_at - 1e-15);
                prop_assert!(hat <= prev_hat + 1e-15);
                prev_at = at;
                prev_hat = hat;
            }
        }

        #[test]
        fn uniform_bayes_orders_like_avg(seed in 0u64..500) {
            let r = random_binary(4, 5, 3, seed);
            let b = bayes(&r, &[0.0, 1.0], None, None).unwrap().0;
            let a = avg(&r).unwrap();
            prop_assert_eq!(
                scores_to_ranking(&b.scores, TieRule::Average).unwrap(),
                scores_to_ranking(&a.scores, TieRule::Average).unwrap()
            );
            let median = bayes(&r, &[0.0, 1.0], None, Some(0.5)).unwrap().0;
            prop_assert_eq!(
                scores_to_ranking(&median.scores, TieRule::Average).unwrap(),
                scores_to_ranking(&b.scores, TieRule::Average).unwrap()
            );
        }
    }
}
