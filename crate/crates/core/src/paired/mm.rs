//! Minorize-maximize iteration for Plackett-Luce / Bradley-Terry strengths on a win matrix.

use crate::error::{RankError, Result};
use crate::ranking::{ScoreVector, Warning, WarningKind};
use crate::tensor::PairwiseCounts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmOptions {
    pub max_iter: usize,
    /// Stop once no normalized strength moves by more than this.
    pub tol: f64,
    /// Add half a win to every ordered pair before iterating.
    pub smoothing: bool,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
            smoothing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmFit {
    /// Strengths normalized to sum to one.
    pub scores: ScoreVector,
    /// Log-likelihood after initialization and after every sweep.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

fn log_likelihood(w: &[Vec<f64>], pi: &[f64]) -> f64 {
    let l = pi.len();
    let mut ll = 0.0;
    for i in 0..l {
        for j in 0..l {
            if i != j && w[i][j] > 0.0 {
                ll += w[i][j] * (pi[i].ln() - (pi[i] + pi[j]).ln());
            }
        }
    }
    ll
}

/// Cyclic MM updates `pi_i <- w_i / sum_j n_ij / (pi_i + pi_j)`, renormalized after each sweep.
pub fn plackett_luce_mm(c: &PairwiseCounts, opts: &MmOptions) -> Result<MmFit> {
    if !(opts.tol > 0.0) {
        return Err(RankError::param("MM tolerance must be positive"));
    }
    let l = c.models();
    let add = if opts.smoothing { 0.5 } else { 0.0 };
    let w: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| if i == j { 0.0 } else { c.wins[i][j] as f64 + add })
                .collect()
        })
        .collect();
    let wins: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = wins.iter().sum();
    let mut warnings = Vec::new();
    if total == 0.0 {
        return Ok(MmFit {
            scores: ScoreVector::new("plackett_luce", vec![1.0 / l as f64; l]),
            log_likelihood_trace: vec![0.0],
            iterations: 0,
            converged: true,
            warnings,
        });
    }
    let zero_win: Vec<usize> = (0..l).filter(|&i| wins[i] == 0.0).collect();
    if !zero_win.is_empty() {
        warnings.push(Warning::new(
            WarningKind::DegenerateStrength,
            format!("models {zero_win:?} have no wins; their strength is 0"),
        ));
    }
    let mut pi: Vec<f64> = wins.iter().map(|v| v / total).collect();
    let mut trace = vec![log_likelihood(&w, &pi)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let old = pi.clone();
        for i in 0..l {
            if wins[i] == 0.0 {
                continue;
            }
            let d: f64 = (0..l)
                .filter(|&j| j != i)
                .map(|j| (w[i][j] + w[j][i], j))
                .filter(|(n, _)| *n > 0.0)
                .map(|(n, j)| n / (pi[i] + pi[j]))
                .sum();
            if d > 0.0 {
                pi[i] = wins[i] / d;
            }
        }
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
        iterations += 1;
        trace.push(log_likelihood(&w, &pi));
        let delta = pi
            .iter()
            .zip(&old)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(Warning::new(
            WarningKind::NonConvergence,
            format!("MM did not reach tolerance in {iterations} sweeps"),
        ));
    }
    Ok(MmFit {
        scores: ScoreVector::new("plackett_luce", pi),
        log_likelihood_trace: trace,
        iterations,
        converged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, random_binary};
    use crate::paired::{bradley_terry, PairedOptions};
    use crate::ranking::{scores_to_ranking, TieRule};
    use crate::tensor::pairwise_counts;

    #[test]
    fn symmetric_is_uniform() {
        let c = PairwiseCounts::from_wins(vec![vec![0, 2, 5], vec![2, 0, 1], vec![5, 1, 0]]).unwrap();
        let fit = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
        for p in &fit.scores.scores {
            assert!((p - 1.0 / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn two_players_closed_form() {
        let c = PairwiseCounts::from_wins(vec![vec![0, 3], vec![1, 0]]).unwrap();
        let fit = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
        assert!((fit.scores.scores[0] - 0.75).abs() < 1e-8);
        assert!((fit.scores.scores[1] - 0.25).abs() < 1e-8);
    }

    #[test]
    fn fix_a_matches_bt_ordering() {
        let c = pairwise_counts(&fix_a()).unwrap();
        let mm = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
        let bt = bradley_terry(&c, &PairedOptions::ml()).unwrap();
        assert_eq!(
            scores_to_ranking(&mm.scores.scores, TieRule::Average).unwrap(),
            scores_to_ranking(&bt.scores.scores, TieRule::Average).unwrap()
        );
        let norm: f64 = bt.scores.scores.iter().sum();
        for (a, b) in mm.scores.scores.iter().zip(&bt.scores.scores) {
            assert!((a - b / norm).abs() < 1e-6);
        }
    }

    #[test]
    fn log_likelihood_never_decreases() {
        for seed in 0..20 {
            let c = pairwise_counts(&random_binary(5, 6, 2, seed)).unwrap();
            let fit = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
            for w in fit.log_likelihood_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0), "{w:?}");
            }
        }
    }

    #[test]
    fn zero_win_model() {
        let c = PairwiseCounts::from_wins(vec![vec![0, 2, 1], vec![1, 0, 3], vec![0, 0, 0]]).unwrap();
        let fit = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
        assert_eq!(fit.scores.scores[2], 0.0);
        assert!(fit
            .warnings
            .iter()
            .any(|w| w.kind == WarningKind::DegenerateStrength));
        let smooth = plackett_luce_mm(
            &c,
            &MmOptions {
                smoothing: true,
                ..MmOptions::default()
            },
        )
        .unwrap();
        assert!(smooth.scores.scores[2] > 0.0);
        assert!(smooth.warnings.is_empty());
    }

    #[test]
    fn no_wins_is_uniform() {
        let c = PairwiseCounts::from_wins(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let fit = plackett_luce_mm(&c, &MmOptions::default()).unwrap();
        assert_eq!(fit.scores.scores, vec![0.5, 0.5]);
    }
}
