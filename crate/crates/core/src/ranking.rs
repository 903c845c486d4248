//! Score vectors, tie-aware rankings, and the structured warnings fits attach to results.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};

/// Default number of decimal digits kept before grouping equal scores.
pub const DEFAULT_TIE_DECIMALS: i32 = 10;

/// Per-model real scores, larger is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub method_id: String,
}

impl ScoreVector {
    pub fn new(method_id: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            scores,
            method_id: method_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn to_ranking(&self) -> Result<Ranking> {
        scores_to_ranking(&self.scores, TieRule::Average)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    #[default]
    Average,
    Min,
    Max,
}

impl std::str::FromStr for TieRule {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(TieRule::Average),
            "min" => Ok(TieRule::Min),
            "max" => Ok(TieRule::Max),
            other => Err(RankError::config(format!("unknown tie rule `{other}`"))),
        }
    }
}

/// 1-indexed ranks, lower is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ranks: Vec<f64>,
    pub tie_rule: TieRule,
}

impl Ranking {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Ranks negated, so that larger means better like a score.
    pub fn as_scores(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| -r).collect()
    }

    /// Model indices from best to worst (ties in index order).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks.len()).collect();
        idx.sort_by(|&a, &b| self.ranks[a].total_cmp(&self.ranks[b]).then(a.cmp(&b)));
        idx
    }

    /// Builds a ranking from groups listed best-first; members of a group are tied.
    pub fn from_groups(groups: &[Vec<usize>], models: usize, tie_rule: TieRule) -> Self {
        let mut ranks = vec![0.0; models];
        let mut start = 0usize;
        for group in groups {
            let lo = (start + 1) as f64;
            let hi = (start + group.len()) as f64;
            let r = match tie_rule {
                TieRule::Average => (lo + hi) / 2.0,
                TieRule::Min => lo,
                TieRule::Max => hi,
            };
            for &g in group {
                ranks[g] = r;
            }
            start += group.len();
        }
        Self { ranks, tie_rule }
    }

    pub fn all_tied(models: usize, tie_rule: TieRule) -> Self {
        let all: Vec<usize> = (0..models).collect();
        Self::from_groups(&[all], models, tie_rule)
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let y = (x * scale).round() / scale;
    if y.is_finite() {
        y
    } else {
        x
    }
}

/// Descending-score ranking with ties detected after rounding to `decimals` digits.
pub fn scores_to_ranking_with(scores: &[f64], tie_rule: TieRule, decimals: i32) -> Result<Ranking> {
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(RankError::InvalidScore { index, value });
    }
    let rounded: Vec<f64> = scores.iter().map(|&s| round_to(s, decimals)).collect();
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| rounded[b].total_cmp(&rounded[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &idx {
        match groups.last_mut() {
            Some(g) if rounded[g[0]] == rounded[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    Ok(Ranking::from_groups(&groups, scores.len(), tie_rule))
}

pub fn scores_to_ranking(scores: &[f64], tie_rule: TieRule) -> Result<Ranking> {
    scores_to_ranking_with(scores, tie_rule, DEFAULT_TIE_DECIMALS)
}

/// Average-tie ranks for values where larger is better (exact equality for ties).
pub(crate) fn descending_average_ranks<T: PartialOrd + Copy>(values: &[T]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    NonConvergence,
    Separation,
    DegenerateStrength,
    Truncation,
    DegenerateSeriation,
    Fallback,
    MissingPrior,
}

/// Non-fatal condition attached to a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strict_scores() {
        let r = scores_to_ranking(&[0.9, 0.1, 0.5], TieRule::Average).unwrap();
        assert_eq!(r.ranks, vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn average_ties() {
        let r = scores_to_ranking(&[0.5, 0.5], TieRule::Average).unwrap();
        assert_eq!(r.ranks, vec![1.5, 1.5]);
    }

    #[test]
    fn min_and_max_ties() {
        let r = scores_to_ranking(&[0.5, 0.5, 0.1], TieRule::Min).unwrap();
        assert_eq!(r.ranks, vec![1.0, 1.0, 3.0]);
        let r = scores_to_ranking(&[0.5, 0.5, 0.1], TieRule::Max).unwrap();
        assert_eq!(r.ranks, vec![2.0, 2.0, 3.0]);
    }

    #[test]
    fn nan_rejected() {
        assert!(matches!(
            scores_to_ranking(&[0.1, f64::NAN], TieRule::Average),
            Err(RankError::InvalidScore { index: 1, .. })
        ));
    }

    #[test]
    fn last_bit_noise_is_a_tie() {
        let a = 0.1 + 0.2;
        let r = scores_to_ranking(&[a, 0.3], TieRule::Average).unwrap();
        assert_eq!(r.ranks, vec![1.5, 1.5]);
        let r = scores_to_ranking_with(&[a, 0.3], TieRule::Average, 17).unwrap();
        assert_eq!(r.ranks, vec![1.0, 2.0]);
    }

    #[test]
    fn descending_ranks_average_ties() {
        assert_eq!(
            descending_average_ranks(&[3u32, 1, 3, 0]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    proptest! {
        #[test]
        fn average_ranks_sum(scores in proptest::collection::vec(-5i32..5, 1..12)) {
            let s: Vec<f64> = scores.iter().map(|&v| v as f64 * 0.25).collect();
            let r = scores_to_ranking(&s, TieRule::Average).unwrap();
            let l = s.len() as f64;
            prop_assert!((r.ranks.iter().sum::<f64>() - l * (l + 1.0) / 2.0).abs() < 1e-9);
            for i in 0..s.len() {
                for j in 0..s.len() {
                    prop_assert_eq!(s[i] == s[j], r.ranks[i] == r.ranks[j]);
                }
            }
        }

        #[test]
        fn permutation_equivariant(scores in proptest::collection::vec(-4i32..4, 2..10), seed in 0u64..1000) {
            let s: Vec<f64> = scores.iter().map(|&v| v as f64).collect();
            let mut perm: Vec<usize> = (0..s.len()).collect();
            // deterministic shuffle
            let mut state = seed;
            for i in (1..perm.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let permuted: Vec<f64> = perm.iter().map(|&p| s[p]).collect();
            let r = scores_to_ranking(&s, TieRule::Average).unwrap();
            let rp = scores_to_ranking(&permuted, TieRule::Average).unwrap();
            for (k, &p) in perm.iter().enumerate() {
                prop_assert_eq!(rp.ranks[k], r.ranks[p]);
            }
        }
    }
}
