//! Setwise Luce-family models fitted on winner/loser events.

use super::{
    fit, strengths, strongly_connected, Estimation, PairedFit, PairedOptions, StrengthParams, TieParam,
};
use crate::error::{RankError, Result};
use crate::numkit::log_sum_exp;
use crate::ranking::{ScoreVector, Warning, WarningKind};
use crate::tensor::{SetwiseEvent, SetwiseEvents};

fn method_id(base: &str, est: Estimation) -> String {
    match est {
        Estimation::Ml => base.to_string(),
        Estimation::Map { .. } => format!("{base}_map"),
    }
}

fn require_events(events: &SetwiseEvents) -> Result<()> {
    if events.is_empty() {
        return Err(RankError::InsufficientData(
            "no informative setwise events (every question-trial was all-correct or all-wrong)".into(),
        ));
    }
    Ok(())
}

fn win_graph_connected(models: usize, groups: &[(SetwiseEvent, usize)]) -> bool {
    let mut beats = vec![vec![false; models]; models];
    for (e, _) in groups {
        for &i in &e.winners {
            for &j in &e.losers {
                beats[i][j] = true;
            }
        }
    }
    strongly_connected(models, |i, j| beats[i][j])
}

fn btl_grouped(models: usize, groups: &[(SetwiseEvent, usize)], theta: &[f64], grad: &mut [f64]) -> f64 {
    grad[..models].iter_mut().for_each(|g| *g = 0.0);
    let mut ll = 0.0;
    let mut buf = Vec::new();
    for (e, count) in groups {
        let c = *count as f64;
        for &i in &e.winners {
            buf.clear();
            buf.push(theta[i]);
            buf.extend(e.losers.iter().map(|&j| theta[j]));
            let lz = log_sum_exp(&buf);
            ll += c * (theta[i] - lz);
            grad[i] += c * (1.0 - (theta[i] - lz).exp());
            for &j in &e.losers {
                grad[j] -= c * (theta[j] - lz).exp();
            }
        }
    }
    ll
}

/// `sum over events and winners i of log(pi_i / (pi_i + sum_{j in V} pi_j))` and its gradient.
pub fn btl_log_likelihood(events: &SetwiseEvents, theta: &[f64], grad: &mut [f64]) -> f64 {
    btl_grouped(events.models, &events.grouped(), theta, grad)
}

pub fn bradley_terry_luce(events: &SetwiseEvents, opts: &PairedOptions) -> Result<PairedFit> {
    require_events(events)?;
    let l = events.models;
    let groups = events.grouped();
    let identified = win_graph_connected(l, &groups);
    let scale: f64 = groups.iter().map(|(e, c)| (e.winners.len() * c) as f64).sum();
    let raw = fit(l, vec![0.0; l], scale, opts, &[], identified, |x, g| {
        btl_grouped(l, &groups, x, g)
    })?;
    let mut g = vec![0.0; l];
    let ll = btl_grouped(l, &groups, &raw.x, &mut g);
    let theta = raw.x;
    Ok(PairedFit {
        scores: ScoreVector::new(
            method_id("bradley_terry_luce", opts.estimation),
            strengths(&theta),
        ),
        params: StrengthParams {
            log_strengths: theta,
            tie_param: None,
        },
        log_likelihood: ll,
        iterations: raw.iterations,
        converged: raw.converged,
        warnings: raw.warnings,
    })
}

/// Elementary symmetric polynomials `e_0..=e_order` of `x`, skipping index `skip`.
fn esp(x: &[f64], order: usize, skip: Option<usize>) -> Vec<f64> {
    let mut e = vec![0.0; order + 1];
    e[0] = 1.0;
    for (i, &v) in x.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        for j in (1..=order).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

/// Pieces of `log Z` over the full model set for tie orders `1..=D`.
struct Partition {
    log_z: f64,
    /// `d log Z / d theta_k`.
    d_theta: Vec<f64>,
    /// `d log Z / d log delta_t` for `t = 1..=D`.
    d_log_delta: Vec<f64>,
}

fn partition(theta: &[f64], log_delta: &[f64]) -> Partition {
    let l = theta.len();
    let d = log_delta.len().min(l);
    let m = theta.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut terms = vec![0.0; d];
    let mut d_theta_raw = vec![0.0; l];
    let mut xs = vec![0.0; l];
    for t in 1..=d {
        let delta = log_delta[t - 1].exp();
        for (x, &th) in xs.iter_mut().zip(theta) {
            *x = ((th - m) / t as f64).exp();
        }
        terms[t - 1] = delta * esp(&xs, t, None)[t];
        for k in 0..l {
            let e_without = esp(&xs, t - 1, Some(k))[t - 1];
            d_theta_raw[k] += delta * xs[k] * e_without / t as f64;
        }
    }
    let z: f64 = terms.iter().sum();
    Partition {
        log_z: m + z.ln(),
        d_theta: d_theta_raw.iter().map(|v| v / z).collect(),
        d_log_delta: terms.iter().map(|v| v / z).collect(),
    }
}

/// `log Z(S)` for the full set `S` of models with strengths `exp(theta)` and tie weights
/// `delta[t - 1]`, `t = 1..=D`.
pub fn davidson_luce_log_partition(theta: &[f64], delta: &[f64]) -> f64 {
    let log_delta: Vec<f64> = delta.iter().map(|d| d.ln()).collect();
    partition(theta, &log_delta).log_z
}

/// Davidson-Luce log-likelihood. `params` holds `theta_1..theta_L` followed by
/// `log delta_2..log delta_D`; events with more than `D` winners are ignored.
pub fn davidson_luce_log_likelihood(
    events: &SetwiseEvents,
    max_tie_order: usize,
    params: &[f64],
    grad: &mut [f64],
) -> f64 {
    let groups: Vec<_> = events
        .grouped()
        .into_iter()
        .filter(|(e, _)| e.winners.len() <= max_tie_order)
        .collect();
    dl_grouped(events.models, max_tie_order, &groups, params, grad)
}

fn dl_grouped(
    models: usize,
    order: usize,
    groups: &[(SetwiseEvent, usize)],
    params: &[f64],
    grad: &mut [f64],
) -> f64 {
    let theta = &params[..models];
    let mut log_delta = vec![0.0; order];
    log_delta[1..].copy_from_slice(&params[models..models + order - 1]);
    grad[..models + order - 1].iter_mut().for_each(|g| *g = 0.0);
    let part = partition(theta, &log_delta);
    let mut ll = 0.0;
    let mut total = 0.0;
    for (e, count) in groups {
        let c = *count as f64;
        let t = e.winners.len();
        let mean: f64 = e.winners.iter().map(|&i| theta[i]).sum::<f64>() / t as f64;
        ll += c * (log_delta[t - 1] + mean);
        for &i in &e.winners {
            grad[i] += c / t as f64;
        }
        if t >= 2 {
            grad[models + t - 2] += c;
        }
        total += c;
    }
    ll -= total * part.log_z;
    for k in 0..models {
        grad[k] -= total * part.d_theta[k];
    }
    for t in 2..=order {
        grad[models + t - 2] -= total * part.d_log_delta[t - 1];
    }
    ll
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DavidsonLuceOptions {
    pub base: PairedOptions,
    /// Largest tie order `D`; defaults to `L - 1`.
    pub max_tie_order: Option<usize>,
}

impl From<PairedOptions> for DavidsonLuceOptions {
    fn from(base: PairedOptions) -> Self {
        Self {
            base,
            max_tie_order: None,
        }
    }
}

/// Joint fit of log-strengths and tie weights `delta_2..delta_D` (`delta_1 = 1`).
pub fn davidson_luce(events: &SetwiseEvents, opts: &DavidsonLuceOptions) -> Result<PairedFit> {
    require_events(events)?;
    let l = events.models;
    let order = opts.max_tie_order.unwrap_or(l.saturating_sub(1).max(1));
    if order == 0 || order > l {
        return Err(RankError::param(format!(
            "maximum tie order {order} must lie in [1, {l}]"
        )));
    }
    let mut groups = events.grouped();
    let before: usize = groups.iter().map(|(_, c)| c).sum();
    groups.retain(|(e, _)| e.winners.len() <= order);
    let kept: usize = groups.iter().map(|(_, c)| c).sum();
    let mut warnings = Vec::new();
    if kept < before {
        warnings.push(Warning::new(
            WarningKind::Truncation,
            format!(
                "{} events with more than {order} winners were dropped",
                before - kept
            ),
        ));
    }
    if groups.is_empty() {
        return Err(RankError::InsufficientData(format!(
            "no events with at most {order} winners"
        )));
    }
    let identified = win_graph_connected(l, &groups);
    let dim = l + order - 1;
    let raw = fit(
        l,
        vec![0.0; dim],
        kept as f64,
        &opts.base,
        &[],
        identified,
        |x, g| dl_grouped(l, order, &groups, x, g),
    )?;
    let mut g = vec![0.0; dim];
    let ll = dl_grouped(l, order, &groups, &raw.x, &mut g);
    let mut delta = vec![1.0];
    delta.extend(raw.x[l..].iter().map(|v| v.exp()));
    let theta = raw.x[..l].to_vec();
    warnings.extend(raw.warnings);
    Ok(PairedFit {
        scores: ScoreVector::new(
            method_id("davidson_luce", opts.base.estimation),
            strengths(&theta),
        ),
        params: StrengthParams {
            log_strengths: theta,
            tie_param: Some(TieParam::DavidsonLuce { delta }),
        },
        log_likelihood: ll,
        iterations: raw.iterations,
        converged: raw.converged,
        warnings,
    })
}
