//! The response tensor and the pointwise, pairwise and setwise views derived from it.
//!
//! Every ranking method starts from a dense `L x M x N` array of outcomes: `L` models,
//! `M` questions and `N` repeated trials per model-question pair. Binary tensors store
//! 0/1 correctness; categorical tensors store a category index in `0..num_categories`.

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};

/// Dense `L x M x N` outcome tensor, stored row-major with the trial axis innermost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTensor {
    outcomes: Vec<u8>,
    models: usize,
    questions: usize,
    trials: usize,
    num_categories: usize,
    model_names: Option<Vec<String>>,
}

impl ResponseTensor {
    /// Builds a tensor from a flat buffer laid out as `[l][m][n]`.
    pub fn new(
        models: usize,
        questions: usize,
        trials: usize,
        num_categories: usize,
        outcomes: Vec<u8>,
    ) -> Result<Self> {
        if models == 0 || questions == 0 || trials == 0 {
            return Err(RankError::Schema(format!(
                "tensor dimensions must be positive, got {models}x{questions}x{trials}"
            )));
        }
        if num_categories < 2 {
            return Err(RankError::Schema(format!(
                "num_categories must be at least 2, got {num_categories}"
            )));
        }
        if num_categories > u8::MAX as usize + 1 {
            return Err(RankError::Schema(format!(
                "num_categories {num_categories} exceeds 256"
            )));
        }
        let expected = models * questions * trials;
        if outcomes.len() != expected {
            return Err(RankError::Schema(format!(
                "expected {expected} outcomes for a {models}x{questions}x{trials} tensor, got {}",
                outcomes.len()
            )));
        }
        if let Some((idx, &v)) = outcomes
            .iter()
            .enumerate()
            .find(|(_, &v)| v as usize >= num_categories)
        {
            let l = idx / (questions * trials);
            let m = (idx / trials) % questions;
            let n = idx % trials;
            return Err(RankError::Schema(format!(
                "outcome {v} at ({l},{m},{n}) is outside 0..{num_categories}"
            )));
        }
        Ok(Self {
            outcomes,
            models,
            questions,
            trials,
            num_categories,
            model_names: None,
        })
    }

    /// Binary tensor from a flat `[l][m][n]` buffer.
    pub fn binary(models: usize, questions: usize, trials: usize, outcomes: Vec<u8>) -> Result<Self> {
        Self::new(models, questions, trials, 2, outcomes)
    }

    /// Builds a tensor from nested `L x M x N` vectors.
    pub fn from_nested(data: &[Vec<Vec<u8>>], num_categories: usize) -> Result<Self> {
        let models = data.len();
        let questions = data.first().map_or(0, Vec::len);
        let trials = data.first().and_then(|row| row.first()).map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(models * questions * trials);
        for (l, row) in data.iter().enumerate() {
            if row.len() != questions {
                return Err(RankError::Schema(format!(
                    "model {l} has {} questions, expected {questions}",
                    row.len()
                )));
            }
            for (m, cell) in row.iter().enumerate() {
                if cell.len() != trials {
                    return Err(RankError::Schema(format!(
                        "model {l}, question {m} has {} trials, expected {trials}",
                        cell.len()
                    )));
                }
                flat.extend_from_slice(cell);
            }
        }
        Self::new(models, questions, trials, num_categories, flat)
    }

    pub fn with_model_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.models {
            return Err(RankError::Schema(format!(
                "{} model names supplied for {} models",
                names.len(),
                self.models
            )));
        }
        self.model_names = Some(names);
        Ok(self)
    }

    pub fn models(&self) -> usize {
        self.models
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn model_names(&self) -> Option<&[String]> {
        self.model_names.as_deref()
    }

    /// Label for model `l`, falling back to its index.
    pub fn model_label(&self, l: usize) -> String {
        self.model_names
            .as_ref()
            .map(|n| n[l].clone())
            .unwrap_or_else(|| l.to_string())
    }

    pub fn is_binary(&self) -> bool {
        self.num_categories == 2
    }

    pub fn is_categorical(&self) -> bool {
        self.num_categories > 2
    }

    /// Rejects categorical input for methods defined only on 0/1 outcomes.
    pub fn require_binary(&self, method: &str) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(RankError::Category(format!(
                "{method} requires binary outcomes but the tensor has {} categories",
                self.num_categories
            )))
        }
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize, n: usize) -> u8 {
        self.outcomes[(l * self.questions + m) * self.trials + n]
    }

    /// Trial outcomes of model `l` on question `m`.
    #[inline]
    pub fn cell(&self, l: usize, m: usize) -> &[u8] {
        let start = (l * self.questions + m) * self.trials;
        &self.outcomes[start..start + self.trials]
    }

    pub fn as_flat(&self) -> &[u8] {
        &self.outcomes
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<u8>>> {
        (0..self.models)
            .map(|l| (0..self.questions).map(|m| self.cell(l, m).to_vec()).collect())
            .collect()
    }

    /// Keeps the trials listed per question; `picks[m]` holds the trial indices for question `m`
    /// and every list must have the same length.
    pub fn select_trials_per_question(&self, picks: &[Vec<usize>]) -> Result<Self> {
        if picks.len() != self.questions {
            return Err(RankError::DimensionMismatch(format!(
                "{} trial selections for {} questions",
                picks.len(),
                self.questions
            )));
        }
        let width = picks.first().map_or(0, Vec::len);
        if picks.iter().any(|p| p.len() != width) {
            return Err(RankError::DimensionMismatch(
                "trial selections must have equal length".into(),
            ));
        }
        if let Some(bad) = picks.iter().flatten().find(|&&n| n >= self.trials) {
            return Err(RankError::param(format!(
                "trial index {bad} out of range 0..{}",
                self.trials
            )));
        }
        let mut flat = Vec::with_capacity(self.models * self.questions * width);
        for l in 0..self.models {
            for (m, pick) in picks.iter().enumerate() {
                let cell = self.cell(l, m);
                flat.extend(pick.iter().map(|&n| cell[n]));
            }
        }
        let mut out = Self::new(self.models, self.questions, width, self.num_categories, flat)?;
        out.model_names.clone_from(&self.model_names);
        Ok(out)
    }

    /// The same trial indices for every question.
    pub fn select_trials(&self, trials: &[usize]) -> Result<Self> {
        let picks = vec![trials.to_vec(); self.questions];
        self.select_trials_per_question(&picks)
    }

    /// Single-trial slice `R[:, :, n]`.
    pub fn trial_slice(&self, n: usize) -> Result<Self> {
        self.select_trials(&[n])
    }

    /// Sub-tensor restricted to the given models, in the given order.
    pub fn select_models(&self, models: &[usize]) -> Result<Self> {
        if let Some(bad) = models.iter().find(|&&l| l >= self.models) {
            return Err(RankError::param(format!(
                "model index {bad} out of range 0..{}",
                self.models
            )));
        }
        let block = self.questions * self.trials;
        let mut flat = Vec::with_capacity(models.len() * block);
        for &l in models {
            flat.extend_from_slice(&self.outcomes[l * block..(l + 1) * block]);
        }
        let mut out = Self::new(
            models.len(),
            self.questions,
            self.trials,
            self.num_categories,
            flat,
        )?;
        if let Some(names) = &self.model_names {
            out.model_names = Some(models.iter().map(|&l| names[l].clone()).collect());
        }
        Ok(out)
    }

    /// Repeats the question block `k` times (`M' = kM`).
    pub fn replicate_questions(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(RankError::param("replication factor must be >= 1"));
        }
        let block = self.questions * self.trials;
        let mut flat = Vec::with_capacity(self.outcomes.len() * k);
        for l in 0..self.models {
            let row = &self.outcomes[l * block..(l + 1) * block];
            for _ in 0..k {
                flat.extend_from_slice(row);
            }
        }
        let mut out = Self::new(
            self.models,
            self.questions * k,
            self.trials,
            self.num_categories,
            flat,
        )?;
        out.model_names.clone_from(&self.model_names);
        Ok(out)
    }

    /// Repeats the trial block `k` times (`N' = kN`).
    pub fn replicate_trials(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(RankError::param("replication factor must be >= 1"));
        }
        let mut flat = Vec::with_capacity(self.outcomes.len() * k);
        for l in 0..self.models {
            for m in 0..self.questions {
                let cell = self.cell(l, m);
                for _ in 0..k {
                    flat.extend_from_slice(cell);
                }
            }
        }
        let mut out = Self::new(
            self.models,
            self.questions,
            self.trials * k,
            self.num_categories,
            flat,
        )?;
        out.model_names.clone_from(&self.model_names);
        Ok(out)
    }

    /// Per-model success totals `S_l` over all questions and trials (binary input).
    pub fn success_totals(&self) -> Result<Vec<u64>> {
        self.require_binary("success_totals")?;
        let block = self.questions * self.trials;
        Ok((0..self.models)
            .map(|l| {
                self.outcomes[l * block..(l + 1) * block]
                    .iter()
                    .map(|&v| v as u64)
                    .sum()
            })
            .collect())
    }
}

/// Auxiliary `M x D` outcomes (for example greedy decodes) used as Dirichlet pseudo-counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorOutcomes {
    outcomes: Vec<u8>,
    questions: usize,
    draws: usize,
    num_categories: usize,
}

impl PriorOutcomes {
    pub fn new(questions: usize, draws: usize, num_categories: usize, outcomes: Vec<u8>) -> Result<Self> {
        if outcomes.len() != questions * draws {
            return Err(RankError::Schema(format!(
                "prior expects {} entries for {questions}x{draws}, got {}",
                questions * draws,
                outcomes.len()
            )));
        }
        if let Some(v) = outcomes.iter().find(|&&v| v as usize >= num_categories) {
            return Err(RankError::Schema(format!(
                "prior outcome {v} outside 0..{num_categories}"
            )));
        }
        Ok(Self {
            outcomes,
            questions,
            draws,
            num_categories,
        })
    }

    /// From nested `M x D` rows.
    pub fn from_rows(rows: &[Vec<u8>], num_categories: usize) -> Result<Self> {
        let questions = rows.len();
        let draws = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != draws) {
            return Err(RankError::Schema("prior rows must have equal length".into()));
        }
        Self::new(questions, draws, num_categories, rows.concat())
    }

    /// A prior with zero draws (only the Dirichlet(1,...,1) baseline remains).
    pub fn empty(questions: usize, num_categories: usize) -> Self {
        Self {
            outcomes: Vec::new(),
            questions,
            draws: 0,
            num_categories,
        }
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn row(&self, m: usize) -> &[u8] {
        &self.outcomes[m * self.draws..(m + 1) * self.draws]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.questions).map(|m| self.row(m).to_vec()).collect()
    }
}

/// Per-question solve rates `p_lm`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRateMatrix {
    pub rates: Vec<Vec<f64>>,
}

impl SolveRateMatrix {
    pub fn row_means(&self) -> Vec<f64> {
        self.rates
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    }
}

/// Per-question success counts `k_lm` out of `trials`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionCounts {
    pub counts: Vec<Vec<u32>>,
    pub trials: u32,
}

impl QuestionCounts {
    pub fn models(&self) -> usize {
        self.counts.len()
    }

    pub fn questions(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }
}

/// Pairwise decisive wins `W` and ties `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairwiseCounts {
    pub wins: Vec<Vec<u64>>,
    pub ties: Vec<Vec<u64>>,
}

impl PairwiseCounts {
    /// Builds counts from explicit matrices (diagonals are ignored and zeroed).
    pub fn from_matrices(wins: Vec<Vec<u64>>, ties: Vec<Vec<u64>>) -> Result<Self> {
        let l = wins.len();
        if wins.iter().any(|r| r.len() != l) || ties.len() != l || ties.iter().any(|r| r.len() != l) {
            return Err(RankError::DimensionMismatch(
                "win and tie matrices must be square and equal-sized".into(),
            ));
        }
        for i in 0..l {
            for j in 0..l {
                if ties[i][j] != ties[j][i] {
                    return Err(RankError::Schema(format!(
                        "tie matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut out = Self { wins, ties };
        for i in 0..l {
            out.wins[i][i] = 0;
            out.ties[i][i] = 0;
        }
        Ok(out)
    }

    /// Win-only counts, no ties.
    pub fn from_wins(wins: Vec<Vec<u64>>) -> Result<Self> {
        let l = wins.len();
        Self::from_matrices(wins, vec![vec![0; l]; l])
    }

    pub fn models(&self) -> usize {
        self.wins.len()
    }

    /// Decisive comparisons between `i` and `j`.
    pub fn decisive(&self, i: usize, j: usize) -> u64 {
        self.wins[i][j] + self.wins[j][i]
    }

    /// All comparisons between `i` and `j`, ties included.
    pub fn total(&self, i: usize, j: usize) -> u64 {
        self.wins[i][j] + self.wins[j][i] + self.ties[i][j]
    }

    pub fn total_wins(&self, i: usize) -> u64 {
        self.wins[i].iter().sum()
    }

    pub fn scaled(&self, k: u64) -> Self {
        let scale = |m: &Vec<Vec<u64>>| m.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
        Self {
            wins: scale(&self.wins),
            ties: scale(&self.ties),
        }
    }

    /// True when the directed graph with an edge `i -> j` whenever `W_ij > 0` is strongly
    /// connected, the condition for a finite, unique Bradley-Terry maximum-likelihood fit.
    pub fn win_graph_strongly_connected(&self) -> bool {
        let l = self.models();
        if l <= 1 {
            return true;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; l];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..l {
                    let w = if forward { self.wins[u][v] } else { self.wins[v][u] };
                    if u != v && w > 0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// A two-level setwise event: every winner tied above every loser.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetwiseEvent {
    pub winners: Vec<usize>,
    pub losers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SetwiseEvents {
    pub events: Vec<SetwiseEvent>,
    pub models: usize,
}

impl SetwiseEvents {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Distinct events with multiplicities, in sorted order.
    pub fn grouped(&self) -> Vec<(SetwiseEvent, usize)> {
        let mut map = std::collections::BTreeMap::new();
        for ev in &self.events {
            *map.entry(ev.clone()).or_insert(0usize) += 1;
        }
        map.into_iter().collect()
    }
}

pub fn solve_rates(r: &ResponseTensor) -> Result<SolveRateMatrix> {
    r.require_binary("solve_rates")?;
    let n = r.trials() as f64;
    let rates = (0..r.models())
        .map(|l| {
            (0..r.questions())
                .map(|m| r.cell(l, m).iter().map(|&v| v as f64).sum::<f64>() / n)
                .collect()
        })
        .collect();
    Ok(SolveRateMatrix { rates })
}

pub fn question_counts(r: &ResponseTensor) -> Result<QuestionCounts> {
    r.require_binary("question_counts")?;
    let counts = (0..r.models())
        .map(|l| {
            (0..r.questions())
                .map(|m| r.cell(l, m).iter().map(|&v| v as u32).sum())
                .collect()
        })
        .collect();
    Ok(QuestionCounts {
        counts,
        trials: r.trials() as u32,
    })
}

pub fn pairwise_counts(r: &ResponseTensor) -> Result<PairwiseCounts> {
    r.require_binary("pairwise_counts")?;
    let l = r.models();
    let mut wins = vec![vec![0u64; l]; l];
    let mut ties = vec![vec![0u64; l]; l];
    for m in 0..r.questions() {
        for n in 0..r.trials() {
            for i in 0..l {
                let a = r.get(i, m, n);
                for j in (i + 1)..l {
                    let b = r.get(j, m, n);
                    match (a, b) {
                        (1, 0) => wins[i][j] += 1,
                        (0, 1) => wins[j][i] += 1,
                        _ => {
                            ties[i][j] += 1;
                            ties[j][i] += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(PairwiseCounts { wins, ties })
}

/// One event per question-trial whose winning set is neither empty nor everyone.
pub fn setwise_events(r: &ResponseTensor) -> Result<SetwiseEvents> {
    r.require_binary("setwise_events")?;
    let l = r.models();
    let mut events = Vec::new();
    for m in 0..r.questions() {
        for n in 0..r.trials() {
            let (winners, losers): (Vec<usize>, Vec<usize>) = (0..l).partition(|&i| r.get(i, m, n) == 1);
            if !winners.is_empty() && !losers.is_empty() {
                events.push(SetwiseEvent { winners, losers });
            }
        }
    }
    Ok(SetwiseEvents { events, models: l })
}
