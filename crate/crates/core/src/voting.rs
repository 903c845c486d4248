//! Social-choice rules with questions as voters ranking models by per-question solve counts.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{max_linear_ordering, MAX_EXACT_ORDER};

/// Largest model count for which Kemeny-Young is solved exactly by default.
pub const DEFAULT_KEMENY_MAX: usize = MAX_EXACT_ORDER;
use crate::ranking::{descending_average_ranks, Ranking, ScoreVector, TieRule};
use crate::tensor::{question_counts, ResponseTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteTiePolicy {
    /// A tied question gives each side half a vote.
    #[default]
    Half,
    /// Tied questions are dropped; only strict preferences count.
    Ignore,
}

impl FromStr for VoteTiePolicy {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::Half),
            "ignore" => Ok(Self::Ignore),
            other => Err(RankError::config(format!("unknown tie policy `{other}`"))),
        }
    }
}

impl VoteTiePolicy {
    fn name(self) -> &'static str {
        match self {
            Self::Half => "half",
            Self::Ignore => "ignore",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    #[default]
    Margin,
    WinningVotes,
}

impl FromStr for Strength {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(Self::Margin),
            "winning_votes" => Ok(Self::WinningVotes),
            other => Err(RankError::config(format!("unknown strength `{other}`"))),
        }
    }
}

impl Strength {
    fn name(self) -> &'static str {
        match self {
            Self::Margin => "margin",
            Self::WinningVotes => "winning_votes",
        }
    }
}

/// Question-level pairwise preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceMatrix {
    /// `P_ij`: questions preferring `i` to `j`, plus half of the tied ones under the half policy.
    pub prefs: Vec<Vec<f64>>,
    /// `W_ij`: questions with `k_im > k_jm`.
    pub strict_wins: Vec<Vec<u64>>,
    pub tie_policy: VoteTiePolicy,
}

impl PreferenceMatrix {
    pub fn models(&self) -> usize {
        self.prefs.len()
    }

    /// `P_ij - P_ji`.
    pub fn margin(&self, i: usize, j: usize) -> f64 {
        self.prefs[i][j] - self.prefs[j][i]
    }
}

fn counts(r: &ResponseTensor, method: &str) -> Result<Vec<Vec<u32>>> {
    r.require_binary(method)?;
    Ok(question_counts(r)?.counts)
}

pub fn preference_matrix(r: &ResponseTensor, tie_policy: VoteTiePolicy) -> Result<PreferenceMatrix> {
    let k = counts(r, "preference_matrix")?;
    let (l, m) = (r.models(), r.questions());
    let mut strict = vec![vec![0u64; l]; l];
    let mut ties = vec![vec![0u64; l]; l];
    for q in 0..m {
        for i in 0..l {
            for j in 0..l {
                if i == j {
                    continue;
                }
                match k[i][q].cmp(&k[j][q]) {
                    Ordering::Greater => strict[i][j] += 1,
                    Ordering::Equal => ties[i][j] += 1,
                    Ordering::Less => {}
                }
            }
        }
    }
    let prefs = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| match tie_policy {
                    VoteTiePolicy::Half => strict[i][j] as f64 + 0.5 * ties[i][j] as f64,
                    VoteTiePolicy::Ignore => strict[i][j] as f64,
                })
                .collect()
        })
        .collect();
    Ok(PreferenceMatrix {
        prefs,
        strict_wins: strict,
        tie_policy,
    })
}

/// Borda scores of the models in `active` (indices into the count matrix), per question
/// with average ranks among the active models.
fn borda_among(k: &[Vec<u32>], active: &[usize]) -> Vec<f64> {
    let l = active.len() as f64;
    let questions = k.first().map_or(0, Vec::len);
    let mut s = vec![0.0; active.len()];
    let mut col = vec![0u32; active.len()];
    for q in 0..questions {
        for (c, &a) in col.iter_mut().zip(active) {
            *c = k[a][q];
        }
        for (si, r) in s.iter_mut().zip(descending_average_ranks(&col)) {
            *si += l - r;
        }
    }
    s
}

pub fn borda(r: &ResponseTensor) -> Result<ScoreVector> {
    let k = counts(r, "borda")?;
    let all: Vec<usize> = (0..r.models()).collect();
    Ok(ScoreVector::new("borda", borda_among(&k, &all)))
}

pub fn copeland(r: &ResponseTensor) -> Result<ScoreVector> {
    let p = preference_matrix(r, VoteTiePolicy::Ignore)?;
    let l = p.models();
    let w = &p.strict_wins;
    let scores = (0..l)
        .map(|i| {
            (0..l)
                .filter(|&j| j != i)
                .map(|j| match w[i][j].cmp(&w[j][i]) {
                    Ordering::Greater => 1.0,
                    Ordering::Less => -1.0,
                    Ordering::Equal => 0.0,
                })
                .sum()
        })
        .collect();
    Ok(ScoreVector::new("copeland", scores))
}

pub fn win_rate(r: &ResponseTensor) -> Result<ScoreVector> {
    let p = preference_matrix(r, VoteTiePolicy::Ignore)?;
    let l = p.models();
    let w = &p.strict_wins;
    let scores = (0..l)
        .map(|i| {
            let won: u64 = (0..l).filter(|&j| j != i).map(|j| w[i][j]).sum();
            let lost: u64 = (0..l).filter(|&j| j != i).map(|j| w[j][i]).sum();
            if won + lost == 0 {
                0.5
            } else {
                won as f64 / (won + lost) as f64
            }
        })
        .collect();
    Ok(ScoreVector::new("win_rate", scores))
}

/// Negated worst defeat: by margin, or by the opponent's vote total under `WinningVotes`.
pub fn minimax(r: &ResponseTensor, variant: Strength, tie_policy: VoteTiePolicy) -> Result<ScoreVector> {
    let p = preference_matrix(r, tie_policy)?;
    let l = p.models();
    let scores = (0..l)
        .map(|i| {
            let worst = (0..l)
                .filter(|&j| j != i && p.margin(j, i) > 0.0)
                .map(|j| match variant {
                    Strength::Margin => p.margin(j, i),
                    Strength::WinningVotes => p.prefs[j][i],
                })
                .fold(0.0, f64::max);
            -worst
        })
        .collect();
    Ok(ScoreVector::new(
        format!("minimax_variant_{}_tie_{}", variant.name(), tie_policy.name()),
        scores,
    ))
}

/// Strongest-path strengths of the Schulze method.
pub fn schulze_paths(p: &PreferenceMatrix) -> Vec<Vec<f64>> {
    let l = p.models();
    let mut path = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            if i != j && p.prefs[i][j] > p.prefs[j][i] {
                path[i][j] = p.prefs[i][j];
            }
        }
    }
    for k in 0..l {
        for i in 0..l {
            if i == k {
                continue;
            }
            for j in 0..l {
                if j == i || j == k {
                    continue;
                }
                let via = path[i][k].min(path[k][j]);
                if via > path[i][j] {
                    path[i][j] = via;
                }
            }
        }
    }
    path
}

/// Score = number of opponents beaten in the beatpath relation.
pub fn schulze(r: &ResponseTensor, tie_policy: VoteTiePolicy) -> Result<ScoreVector> {
    let p = preference_matrix(r, tie_policy)?;
    let path = schulze_paths(&p);
    let l = p.models();
    let scores = (0..l)
        .map(|i| (0..l).filter(|&j| j != i && path[i][j] > path[j][i]).count() as f64)
        .collect();
    Ok(ScoreVector::new(
        format!("schulze_tie_{}", tie_policy.name()),
        scores,
    ))
}

fn reaches(adj: &[Vec<bool>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for (w, &e) in adj[v].iter().enumerate() {
            if e && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Locked edges of Ranked Pairs; victories are taken by (strength desc, i asc, j asc).
pub fn ranked_pairs_locked(p: &PreferenceMatrix, strength: Strength) -> Vec<Vec<bool>> {
    let l = p.models();
    let mut victories: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..l {
        for j in 0..l {
            if i != j && p.prefs[i][j] > p.prefs[j][i] {
                let s = match strength {
                    Strength::Margin => p.margin(i, j),
                    Strength::WinningVotes => p.prefs[i][j],
                };
                victories.push((s, i, j));
            }
        }
    }
    victories.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut locked = vec![vec![false; l]; l];
    for (_, i, j) in victories {
        if !reaches(&locked, j, i) {
            locked[i][j] = true;
        }
    }
    locked
}

/// Score = number of models below in the locked graph.
pub fn ranked_pairs(
    r: &ResponseTensor,
    strength: Strength,
    tie_policy: VoteTiePolicy,
) -> Result<ScoreVector> {
    let p = preference_matrix(r, tie_policy)?;
    let locked = ranked_pairs_locked(&p, strength);
    let l = p.models();
    let scores = (0..l)
        .map(|i| (0..l).filter(|&j| j != i && reaches(&locked, i, j)).count() as f64)
        .collect();
    Ok(ScoreVector::new(
        format!(
            "ranked_pairs_strength_{}_tie_{}",
            strength.name(),
            tie_policy.name()
        ),
        scores,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KemenyResult {
    /// Models best-first.
    pub order: Vec<usize>,
    /// `sum over i placed before j of P_ij`.
    pub objective: f64,
    /// `L - position`, so the first model scores `L`.
    pub scores: ScoreVector,
}

pub fn kemeny_young(r: &ResponseTensor, tie_policy: VoteTiePolicy, max_exact: usize) -> Result<KemenyResult> {
    let p = preference_matrix(r, tie_policy)?;
    let l = p.models();
    let (order, objective) = max_linear_ordering(&p.prefs, max_exact)?;
    let mut scores = vec![0.0; l];
    for (pos, &m) in order.iter().enumerate() {
        scores[m] = (l - pos) as f64;
    }
    Ok(KemenyResult {
        order,
        objective,
        scores: ScoreVector::new(format!("kemeny_young_tie_{}", tie_policy.name()), scores),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationResult {
    pub ranking: Ranking,
    /// Models removed in each round, first round first.
    pub rounds: Vec<Vec<usize>>,
    /// Models never eliminated (tied at the top).
    pub survivors: Vec<usize>,
}

impl EliminationResult {
    /// Negated ranks, usable wherever a score vector is expected.
    pub fn scores(&self, method_id: &str) -> ScoreVector {
        ScoreVector::new(method_id, self.ranking.as_scores())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elimination {
    BelowMean,
    Lowest,
}

fn eliminate(
    r: &ResponseTensor,
    rule: Elimination,
    rank_ties: TieRule,
    method: &str,
) -> Result<EliminationResult> {
    let k = counts(r, method)?;
    let l = r.models();
    let mut active: Vec<usize> = (0..l).collect();
    let mut rounds = Vec::new();
    while active.len() > 1 {
        let s = borda_among(&k, &active);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max - min <= 1e-12 * max.abs().max(1.0) {
            break;
        }
        let out: Vec<usize> = active
            .iter()
            .zip(&s)
            .filter(|(_, &v)| match rule {
                Elimination::BelowMean => v < mean - 1e-12 * mean.abs().max(1.0),
                Elimination::Lowest => v <= min + 1e-12 * min.abs().max(1.0),
            })
            .map(|(&a, _)| a)
            .collect();
        if out.is_empty() {
            break;
        }
        active.retain(|a| !out.contains(a));
        rounds.push(out);
    }
    let mut groups = vec![active.clone()];
    groups.extend(rounds.iter().rev().cloned());
    Ok(EliminationResult {
        ranking: Ranking::from_groups(&groups, l, rank_ties),
        rounds,
        survivors: active,
    })
}

/// Repeatedly drops every model whose Borda score (among the remaining ones) is below the mean.
pub fn nanson(r: &ResponseTensor, rank_ties: TieRule) -> Result<EliminationResult> {
    eliminate(r, Elimination::BelowMean, rank_ties, "nanson")
}

/// Repeatedly drops the lowest Borda scorer(s) among the remaining models.
pub fn baldwin(r: &ResponseTensor, rank_ties: TieRule) -> Result<EliminationResult> {
    eliminate(r, Elimination::Lowest, rank_ties, "baldwin")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityJudgment {
    /// Number of models each model beats under the majority-gauge order.
    pub scores: ScoreVector,
    /// Lower median grade of each model.
    pub medians: Vec<u32>,
}

/// Sequence of `(median, above?, gauge)` keys obtained by repeatedly removing a median grade.
fn judgment_key(grades: &[u32]) -> Vec<(u32, u8, f64)> {
    let mut g = grades.to_vec();
    g.sort_unstable();
    let mut key = Vec::with_capacity(g.len());
    while !g.is_empty() {
        let mid = (g.len() - 1) / 2;
        let med = g[mid];
        let n = g.len() as f64;
        let above = g.iter().filter(|&&x| x > med).count() as f64 / n;
        let below = g.iter().filter(|&&x| x < med).count() as f64 / n;
        key.push(if above > below {
            (med, 1, above)
        } else {
            (med, 0, -below)
        });
        g.remove(mid);
    }
    key
}

fn compare_keys(a: &[(u32, u8, f64)], b: &[(u32, u8, f64)]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2));
        if c != Ordering::Equal {
            return c;
        }
    }
    Ordering::Equal
}

pub fn majority_judgment(r: &ResponseTensor) -> Result<MajorityJudgment> {
    let k = counts(r, "majority_judgment")?;
    let keys: Vec<_> = k.iter().map(|row| judgment_key(row)).collect();
    let l = k.len();
    let scores = (0..l)
        .map(|i| {
            (0..l)
                .filter(|&j| compare_keys(&keys[i], &keys[j]) == Ordering::Greater)
                .count() as f64
        })
        .collect();
    let medians = keys.iter().map(|key| key[0].0).collect();
    Ok(MajorityJudgment {
        scores: ScoreVector::new("majority_judgment", scores),
        medians,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_c, random_binary};
    use crate::ranking::scores_to_ranking;

    fn ranks(s: &[f64]) -> Vec<f64> {
        scores_to_ranking(s, TieRule::Average).unwrap().ranks
    }

    /// Tensor with per-question solve counts `grades[l][m]` out of `trials`.
    fn from_counts(grades: &[Vec<u32>], trials: usize) -> ResponseTensor {
        let (l, m) = (grades.len(), grades[0].len());
        let mut flat = Vec::with_capacity(l * m * trials);
        for row in grades {
            for &g in row {
                for n in 0..trials {
                    flat.push(u8::from((n as u32) < g));
                }
            }
        }
        ResponseTensor::binary(l, m, trials, flat).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn fix_a_preferences() {
        let p = preference_matrix(&fix_a(), VoteTiePolicy::Half).unwrap();
        assert_eq!(p.prefs[0][1], 4.5);
        assert_eq!(p.prefs[0][2], 6.0);
        assert_eq!(p.prefs[1][2], 5.5);
        let b = preference_matrix(&fix_b(3, 4, 2), VoteTiePolicy::Half).unwrap();
        assert!(b
            .prefs
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| i == j || v == 2.0)));
        let c = preference_matrix(&fix_c(5, 1), VoteTiePolicy::Half).unwrap();
        assert_eq!((c.prefs[0][1], c.prefs[1][0]), (5.0, 0.0));
    }

    #[test]
    fn fix_a_scores() {
        let r = fix_a();
        assert_eq!(borda(&r).unwrap().scores, vec![10.5, 9.0, 4.5]);
        assert_eq!(copeland(&r).unwrap().scores, vec![2.0, 0.0, -2.0]);
        // question-level wins: 0 beats 1 on 3, 2 on 6; 1 beats 0 on 2, 2 on 3; 2 beats 0 on 2
        let wr = win_rate(&r).unwrap().scores;
        let want = [9.0 / 13.0, 5.0 / 8.0, 2.0 / 11.0];
        for (a, b) in wr.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{wr:?}");
        }
        assert_eq!(
            minimax(&r, Strength::Margin, VoteTiePolicy::Half).unwrap().scores,
            vec![0.0, -1.0, -4.0]
        );
        assert_eq!(
            ranks(&schulze(&r, VoteTiePolicy::Half).unwrap().scores),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            ranks(
                &ranked_pairs(&r, Strength::Margin, VoteTiePolicy::Half)
                    .unwrap()
                    .scores
            ),
            vec![1.0, 2.0, 3.0]
        );
        let k = kemeny_young(&r, VoteTiePolicy::Half, 16).unwrap();
        assert_eq!(k.order, vec![0, 1, 2]);
        assert_eq!(k.objective, 16.0);
        let n = nanson(&r, TieRule::Average).unwrap();
        assert_eq!(n.rounds[0], vec![2]);
    }

    #[test]
    fn fix_b_everything_tied() {
        let r = fix_b(4, 3, 2);
        assert!(borda(&r).unwrap().scores.windows(2).all(|w| w[0] == w[1]));
        assert!(copeland(&r).unwrap().scores.iter().all(|&s| s == 0.0));
        assert!(win_rate(&r).unwrap().scores.iter().all(|&s| s == 0.5));
        assert!(minimax(&r, Strength::Margin, VoteTiePolicy::Half)
            .unwrap()
            .scores
            .iter()
            .all(|&s| s == 0.0));
        assert!(ranks(&schulze(&r, VoteTiePolicy::Half).unwrap().scores)
            .iter()
            .all(|&x| x == 2.5));
        let n = nanson(&r, TieRule::Average).unwrap();
        assert!(n.rounds.is_empty() && n.ranking.ranks.iter().all(|&x| x == 2.5));
        let b = baldwin(&r, TieRule::Max).unwrap();
        assert!(b.ranking.ranks.iter().all(|&x| x == 4.0));
    }

    #[test]
    fn fix_c_results() {
        let r = fix_c(4, 3);
        assert_eq!(copeland(&r).unwrap().scores, vec![1.0, -1.0]);
        assert_eq!(win_rate(&r).unwrap().scores, vec![1.0, 0.0]);
        assert_eq!(majority_judgment(&r).unwrap().medians, vec![3, 0]);
    }

    #[test]
    fn condorcet_winner_minimax() {
        let r = from_counts(&[vec![3, 3, 2], vec![1, 2, 1], vec![0, 3, 0]], 3);
        let s = minimax(&r, Strength::WinningVotes, VoteTiePolicy::Half)
            .unwrap()
            .scores;
        assert_eq!(s[0], 0.0);
        assert!(s[1] < 0.0 && s[2] < 0.0);
    }

    #[test]
    fn ranked_pairs_drops_weakest_cycle_edge() {
        // margins: 0 over 1 by 2, 1 over 2 by 1, 2 over 0 by 2
        let grades = vec![
            vec![1, 1, 0, 0, 2, 1],
            vec![0, 0, 2, 2, 1, 0],
            vec![2, 2, 1, 1, 0, 0],
        ];
        let r = from_counts(&grades, 3);
        let p = preference_matrix(&r, VoteTiePolicy::Half).unwrap();
        assert!(p.margin(0, 1) > 0.0 && p.margin(1, 2) > 0.0 && p.margin(2, 0) > 0.0);
        let locked = ranked_pairs_locked(&p, Strength::Margin);
        // the weakest victory would close the cycle 2>0>1
        assert!(!locked[1][2]);
        assert!(locked[2][0] && locked[0][1]);
        let s = ranked_pairs(&r, Strength::Margin, VoteTiePolicy::Half)
            .unwrap()
            .scores;
        assert_eq!(ranks(&s), vec![2.0, 3.0, 1.0]);
    }

    #[test]
    fn transitive_chain_is_recovered() {
        let r = from_counts(&[vec![1, 2, 3, 3], vec![3, 3, 0, 2], vec![0, 1, 2, 1]], 3);
        for s in [
            schulze(&r, VoteTiePolicy::Half).unwrap().scores,
            ranked_pairs(&r, Strength::WinningVotes, VoteTiePolicy::Ignore)
                .unwrap()
                .scores,
            kemeny_young(&r, VoteTiePolicy::Half, 16).unwrap().scores.scores,
        ] {
            assert_eq!(ranks(&s)[2], 3.0);
        }
    }

    #[test]
    fn kemeny_reversed_and_brute_force() {
        let r = fix_a();
        let reversed = ResponseTensor::binary(3, 8, 1, r.as_flat().iter().map(|&v| 1 - v).collect()).unwrap();
        assert_eq!(
            kemeny_young(&reversed, VoteTiePolicy::Half, 16).unwrap().order,
            vec![2, 1, 0]
        );
        for seed in 0..200 {
            let l = 2 + (seed as usize % 5);
            let r = random_binary(l, 5, 2, seed);
            for policy in [VoteTiePolicy::Half, VoteTiePolicy::Ignore] {
                let k = kemeny_young(&r, policy, 16).unwrap();
                let p = preference_matrix(&r, policy).unwrap().prefs;
                let brute = permutations(l)
                    .iter()
                    .map(|o| {
                        let mut s = 0.0;
                        for a in 0..l {
                            for b in a + 1..l {
                                s += p[o[a]][o[b]];
                            }
                        }
                        s
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(k.objective, brute);
            }
        }
    }

    #[test]
    fn kemeny_size_limit() {
        let r = random_binary(17, 2, 1, 0);
        assert!(matches!(
            kemeny_young(&r, VoteTiePolicy::Half, 16),
            Err(RankError::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn gauge_breaks_equal_medians() {
        // both medians are 2; model 0 has more grades above it, model 1 more below
        let r = from_counts(&[vec![2, 2, 2, 3, 3], vec![1, 1, 2, 2, 2]], 3);
        let mj = majority_judgment(&r).unwrap();
        assert_eq!(mj.medians, vec![2, 2]);
        assert_eq!(mj.scores.scores, vec![1.0, 0.0]);
        let same = from_counts(&[vec![0, 2, 1], vec![1, 0, 2]], 2);
        assert_eq!(majority_judgment(&same).unwrap().scores.scores, vec![0.0, 0.0]);
    }

    #[test]
    fn two_models_follow_question_wins() {
        for seed in 0..100 {
            let r = random_binary(2, 7, 3, seed);
            let p = preference_matrix(&r, VoteTiePolicy::Half).unwrap();
            let d = p.strict_wins[0][1] as i64 - p.strict_wins[1][0] as i64;
            let outputs = vec![
                borda(&r).unwrap().scores,
                copeland(&r).unwrap().scores,
                win_rate(&r).unwrap().scores,
                minimax(&r, Strength::Margin, VoteTiePolicy::Half).unwrap().scores,
                minimax(&r, Strength::WinningVotes, VoteTiePolicy::Ignore)
                    .unwrap()
                    .scores,
                schulze(&r, VoteTiePolicy::Half).unwrap().scores,
                ranked_pairs(&r, Strength::Margin, VoteTiePolicy::Half)
                    .unwrap()
                    .scores,
                nanson(&r, TieRule::Average).unwrap().ranking.as_scores(),
                baldwin(&r, TieRule::Average).unwrap().ranking.as_scores(),
            ];
            for s in outputs {
                match d.cmp(&0) {
                    Ordering::Greater => assert!(s[0] > s[1]),
                    Ordering::Less => assert!(s[0] < s[1]),
                    Ordering::Equal => assert_eq!(s[0], s[1]),
                }
            }
            let k = kemeny_young(&r, VoteTiePolicy::Half, 16).unwrap();
            if d < 0 {
                assert_eq!(k.order[0], 1);
            } else if d > 0 {
                assert_eq!(k.order[0], 0);
            }
        }
    }

    #[test]
    fn condorcet_winner_elected() {
        let mut found = 0;
        for seed in 0..300 {
            let r = random_binary(5, 6, 2, seed);
            let p = preference_matrix(&r, VoteTiePolicy::Half).unwrap();
            let winner = (0..5).find(|&i| (0..5).all(|j| j == i || p.margin(i, j) > 0.0));
            if let Some(w) = winner {
                found += 1;
                let s = schulze(&r, VoteTiePolicy::Half).unwrap().scores;
                assert_eq!(s[w], 4.0);
                let s = ranked_pairs(&r, Strength::Margin, VoteTiePolicy::Half)
                    .unwrap()
                    .scores;
                assert_eq!(s[w], 4.0);
            }
        }
        assert!(found > 20);
    }

    #[test]
    fn question_replication_invariance() {
        let r = random_binary(4, 5, 3, 77);
        let rep = r.replicate_questions(3).unwrap();
        let rank_of = |t: &ResponseTensor| {
            vec![
                ranks(&borda(t).unwrap().scores),
                ranks(&copeland(t).unwrap().scores),
                ranks(&win_rate(t).unwrap().scores),
                ranks(&minimax(t, Strength::Margin, VoteTiePolicy::Half).unwrap().scores),
                ranks(&schulze(t, VoteTiePolicy::Half).unwrap().scores),
                ranks(
                    &ranked_pairs(t, Strength::WinningVotes, VoteTiePolicy::Half)
                        .unwrap()
                        .scores,
                ),
                kemeny_young(t, VoteTiePolicy::Half, 16)
                    .unwrap()
                    .order
                    .iter()
                    .map(|&v| v as f64)
                    .collect(),
                nanson(t, TieRule::Average).unwrap().ranking.ranks,
                baldwin(t, TieRule::Max).unwrap().ranking.ranks,
                ranks(&majority_judgment(t).unwrap().scores.scores),
            ]
        };
        assert_eq!(rank_of(&r), rank_of(&rep));
    }

    #[test]
    fn half_policy_identity() {
        for seed in 0..50 {
            let r = random_binary(4, 6, 2, seed);
            let p = preference_matrix(&r, VoteTiePolicy::Half).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(p.prefs[i][j] + p.prefs[j][i], 6.0);
                    }
                }
            }
        }
    }
}
