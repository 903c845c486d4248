//! Sequential rating systems (Elo, Glicko, TrueSkill) over the canonical match stream.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::numkit::{normal_cdf, normal_pdf};
use crate::ranking::ScoreVector;
use crate::tensor::ResponseTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchOutcome {
    FirstWins,
    SecondWins,
    TieBothCorrect,
    TieBothWrong,
}

/// One pairwise comparison `(first, second)` with `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub first: usize,
    pub second: usize,
    pub outcome: MatchOutcome,
}

/// Rounds in question-major, trial-minor order; each round lists all pairs lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchStream {
    pub models: usize,
    pub rounds: Vec<Vec<Match>>,
}

pub fn match_stream(r: &ResponseTensor) -> Result<MatchStream> {
    r.require_binary("match stream")?;
    let l = r.models();
    let mut rounds = Vec::with_capacity(r.questions() * r.trials());
    for m in 0..r.questions() {
        for n in 0..r.trials() {
            let mut round = Vec::with_capacity(l * l.saturating_sub(1) / 2);
            for i in 0..l {
                for j in i + 1..l {
                    let outcome = match (r.get(i, m, n), r.get(j, m, n)) {
                        (1, 0) => MatchOutcome::FirstWins,
                        (0, 1) => MatchOutcome::SecondWins,
                        (1, 1) => MatchOutcome::TieBothCorrect,
                        _ => MatchOutcome::TieBothWrong,
                    };
                    round.push(Match {
                        first: i,
                        second: j,
                        outcome,
                    });
                }
            }
            rounds.push(round);
        }
    }
    Ok(MatchStream { models: l, rounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ignore every tie.
    #[default]
    Skip,
    /// Both kinds of tie score one half.
    Draw,
    /// Both-correct ties score one half; both-wrong ties are ignored.
    CorrectDrawOnly,
}

impl FromStr for TiePolicy {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(TiePolicy::Skip),
            "draw" => Ok(TiePolicy::Draw),
            "correct_draw_only" => Ok(TiePolicy::CorrectDrawOnly),
            other => Err(RankError::config(format!("unknown tie policy `{other}`"))),
        }
    }
}

impl TiePolicy {
    /// Score of the first player, or `None` when the match is ignored.
    pub fn score(self, outcome: MatchOutcome) -> Option<f64> {
        match (outcome, self) {
            (MatchOutcome::FirstWins, _) => Some(1.0),
            (MatchOutcome::SecondWins, _) => Some(0.0),
            (MatchOutcome::TieBothCorrect, TiePolicy::Draw | TiePolicy::CorrectDrawOnly) => Some(0.5),
            (MatchOutcome::TieBothWrong, TiePolicy::Draw) => Some(0.5),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TiePolicy::Skip => "skip",
            TiePolicy::Draw => "draw",
            TiePolicy::CorrectDrawOnly => "correct_draw_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloOptions {
    pub k: f64,
    pub initial_rating: f64,
    pub tie_policy: TiePolicy,
}

impl Default for EloOptions {
    fn default() -> Self {
        Self {
            k: 0.05,
            initial_rating: 1500.0,
            tie_policy: TiePolicy::Skip,
        }
    }
}

pub fn elo_expected(ri: f64, rj: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rj - ri) / 400.0))
}

pub fn elo(r: &ResponseTensor, opts: &EloOptions) -> Result<ScoreVector> {
    if !(opts.k > 0.0 && opts.k.is_finite()) {
        return Err(RankError::param(format!("Elo K = {} must be positive", opts.k)));
    }
    let stream = match_stream(r)?;
    let mut ratings = vec![opts.initial_rating; stream.models];
    for m in stream.rounds.iter().flatten() {
        if let Some(s) = opts.tie_policy.score(m.outcome) {
            let e = elo_expected(ratings[m.first], ratings[m.second]);
            let delta = opts.k * (s - e);
            ratings[m.first] += delta;
            ratings[m.second] -= delta;
        }
    }
    Ok(ScoreVector::new(
        format!("elo_tie_{}", opts.tie_policy.name()),
        ratings,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlickoOptions {
    pub initial_rating: f64,
    pub initial_rd: f64,
    /// RD inflation per period: `RD <- min(sqrt(RD^2 + c^2), rd_max)`.
    pub c: f64,
    pub rd_max: f64,
    pub tie_policy: TiePolicy,
}

impl Default for GlickoOptions {
    fn default() -> Self {
        Self {
            initial_rating: 1500.0,
            initial_rd: 350.0,
            c: 0.0,
            rd_max: 350.0,
            tie_policy: TiePolicy::Skip,
        }
    }
}

const GLICKO_Q: f64 = std::f64::consts::LN_10 / 400.0;

pub fn glicko_g(rd: f64) -> f64 {
    1.0 / (1.0 + 3.0 * GLICKO_Q * GLICKO_Q * rd * rd / (PI * PI)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlickoResult {
    pub scores: ScoreVector,
    pub deviations: Vec<f64>,
}

/// Glicko with one rating period per question-trial; all matches of a period are batched.
pub fn glicko(r: &ResponseTensor, opts: &GlickoOptions) -> Result<GlickoResult> {
    if !(opts.initial_rd > 0.0 && opts.rd_max > 0.0) {
        return Err(RankError::param("rating deviations must be positive"));
    }
    if !(opts.c >= 0.0) {
        return Err(RankError::param("inflation constant c must be non-negative"));
    }
    let stream = match_stream(r)?;
    let l = stream.models;
    let mut rating = vec![opts.initial_rating; l];
    let mut rd = vec![opts.initial_rd.min(opts.rd_max); l];
    let q2 = GLICKO_Q * GLICKO_Q;
    for round in &stream.rounds {
        for v in rd.iter_mut() {
            *v = (*v * *v + opts.c * opts.c).sqrt().min(opts.rd_max);
        }
        // per player: sum of g^2 E (1-E) and of g (S - E)
        let mut info = vec![0.0; l];
        let mut surprise = vec![0.0; l];
        let mut played = vec![false; l];
        for m in round {
            let Some(s) = opts.tie_policy.score(m.outcome) else {
                continue;
            };
            let (i, j) = (m.first, m.second);
            for (me, other, score) in [(i, j, s), (j, i, 1.0 - s)] {
                let g = glicko_g(rd[other]);
                let e = 1.0 / (1.0 + 10f64.powf(-g * (rating[me] - rating[other]) / 400.0));
                info[me] += g * g * e * (1.0 - e);
                surprise[me] += g * (score - e);
                played[me] = true;
            }
        }
        let mut new_rating = rating.clone();
        for p in 0..l {
            if !played[p] {
                continue;
            }
            let inv_d2 = q2 * info[p];
            let precision = 1.0 / (rd[p] * rd[p]) + inv_d2;
            new_rating[p] = rating[p] + GLICKO_Q / precision * surprise[p];
            rd[p] = (1.0 / precision).sqrt();
        }
        rating = new_rating;
    }
    Ok(GlickoResult {
        scores: ScoreVector::new(format!("glicko_tie_{}", opts.tie_policy.name()), rating),
        deviations: rd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillOptions {
    pub mu0: f64,
    pub sigma0: f64,
    pub beta: f64,
    pub tau: f64,
    /// Inflate `sigma^2 += tau^2` before every match instead of once per round.
    pub tau_per_match: bool,
}

impl Default for TrueSkillOptions {
    fn default() -> Self {
        Self {
            mu0: 25.0,
            sigma0: 25.0 / 3.0,
            beta: 25.0 / 6.0,
            tau: 0.00333333333,
            tau_per_match: false,
        }
    }
}

/// `phi(t) / Phi(t)`, using the asymptotic expansion deep in the lower tail.
fn v_win(t: f64) -> f64 {
    let denom = normal_cdf(t);
    if denom > 1e-300 && t > -35.0 {
        normal_pdf(t) / denom
    } else {
        -t - 1.0 / t + 2.0 / (t * t * t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillResult {
    pub scores: ScoreVector,
    pub sigmas: Vec<f64>,
}

/// Two-player TrueSkill on decisive matches only.
pub fn trueskill(r: &ResponseTensor, opts: &TrueSkillOptions) -> Result<TrueSkillResult> {
    if !(opts.sigma0 > 0.0 && opts.beta > 0.0 && opts.tau >= 0.0) {
        return Err(RankError::param(
            "TrueSkill sigma0 and beta must be positive, tau non-negative",
        ));
    }
    let stream = match_stream(r)?;
    let l = stream.models;
    let mut mu = vec![opts.mu0; l];
    let mut var = vec![opts.sigma0 * opts.sigma0; l];
    let tau2 = opts.tau * opts.tau;
    for round in &stream.rounds {
        if !opts.tau_per_match {
            var.iter_mut().for_each(|v| *v += tau2);
        }
        for m in round {
            let (w, lo) = match m.outcome {
                MatchOutcome::FirstWins => (m.first, m.second),
                MatchOutcome::SecondWins => (m.second, m.first),
                _ => continue,
            };
            if opts.tau_per_match {
                var[w] += tau2;
                var[lo] += tau2;
            }
            let c2 = 2.0 * opts.beta * opts.beta + var[w] + var[lo];
            let c = c2.sqrt();
            let t = (mu[w] - mu[lo]) / c;
            let v = v_win(t);
            let wf = (v * (v + t)).clamp(0.0, 1.0);
            mu[w] += var[w] / c * v;
            mu[lo] -= var[lo] / c * v;
            var[w] *= 1.0 - var[w] / c2 * wf;
            var[lo] *= 1.0 - var[lo] / c2 * wf;
        }
    }
    Ok(TrueSkillResult {
        scores: ScoreVector::new("trueskill", mu),
        sigmas: var.iter().map(|v| v.sqrt()).collect(),
    })
}
