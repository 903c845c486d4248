//! Limited-memory BFGS with a strong-Wolfe line search, plus a finite-difference gradient
//! checker used by the likelihood test suites.

use std::collections::VecDeque;

use crate::error::{RankError, Result};

/// Objective with analytic gradient: returns `f(x)` and writes `grad f(x)` into `grad`.
pub trait Objective {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Convergence when the gradient infinity-norm drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of curvature pairs kept.
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            memory: 10,
        }
    }
}

impl MinimizeOptions {
    pub fn with_max_iter(max_iter: usize) -> Self {
        Self {
            max_iter,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub point: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn all_finite(f: f64, g: &[f64]) -> bool {
    f.is_finite() && g.iter().all(|v| v.is_finite())
}

struct Probe {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

struct LineSearch<'a, O: Objective> {
    obj: &'a mut O,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    buf: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

impl<O: Objective> LineSearch<'_, O> {
    fn probe(&mut self, alpha: f64) -> Probe {
        for ((b, x), d) in self.buf.iter_mut().zip(self.x).zip(self.dir) {
            *b = x + alpha * d;
        }
        let mut g = vec![0.0; self.x.len()];
        let f = self.obj.eval(&self.buf, &mut g);
        if all_finite(f, &g) {
            let slope = dot(&g, self.dir);
            Probe { alpha, f, g, slope }
        } else {
            Probe {
                alpha,
                f: f64::INFINITY,
                g,
                slope: f64::NAN,
            }
        }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.f <= self.f0 + C1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -C2 * self.slope0
    }

    /// Strong-Wolfe search (bracketing then zoom).
    fn search(&mut self, alpha_init: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            f: self.f0,
            g: Vec::new(),
            slope: self.slope0,
        };
        let mut alpha = alpha_init;
        for i in 0..40 {
            let cur = self.probe(alpha);
            if !cur.f.is_finite() {
                // step went somewhere undefined; shrink towards the last good point
                return self.zoom(prev, cur);
            }
            if !self.armijo(&cur) || (i > 0 && cur.f >= prev.f) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            prev = cur;
            alpha *= 2.0;
        }
        None
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        let mut best: Option<Probe> = None;
        for _ in 0..60 {
            let (a, b) = (lo.alpha, hi.alpha);
            let width = (b - a).abs();
            if width < 1e-16 * a.abs().max(b.abs()).max(1e-300) {
                break;
            }
            // safeguarded quadratic interpolation from lo's value and slope
            let mut trial = 0.5 * (a + b);
            if hi.f.is_finite() && lo.slope.is_finite() {
                let d = b - a;
                let denom = 2.0 * (hi.f - lo.f - lo.slope * d);
                if denom > 0.0 {
                    let cand = a - lo.slope * d * d / denom;
                    let (mn, mx) = (a.min(b), a.max(b));
                    let margin = 0.1 * width;
                    if cand > mn + margin && cand < mx - margin {
                        trial = cand;
                    }
                }
            }
            let cur = self.probe(trial);
            if !cur.f.is_finite() || !self.armijo(&cur) || cur.f >= lo.f {
                hi = cur;
                continue;
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = std::mem::replace(&mut lo, cur);
            } else {
                lo = cur;
            }
            if best.as_ref().is_none_or(|bp| lo.f < bp.f) && lo.alpha > 0.0 {
                best = Some(Probe {
                    alpha: lo.alpha,
                    f: lo.f,
                    g: lo.g.clone(),
                    slope: lo.slope,
                });
            }
        }
        // accept a sufficient-decrease point even without the curvature condition
        if lo.alpha > 0.0 && lo.f < self.f0 {
            return Some(lo);
        }
        best.filter(|p| p.f < self.f0)
    }
}

/// Minimizes `obj` from `x0` with L-BFGS. Accepted steps never increase the objective.
pub fn minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: MinimizeOptions) -> Result<OptimResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    if !f.is_finite() {
        return Err(RankError::Numerical(format!(
            "objective is {f} at the initial point"
        )));
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(RankError::Numerical(format!(
            "gradient component {i} is {} at the initial point",
            g[i]
        )));
    }
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut gnorm = inf_norm(&g);

    while iterations < opts.max_iter && gnorm > opts.tol {
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 || !slope.is_finite() {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let alpha_init = if pairs.is_empty() {
            (1.0 / inf_norm(&d)).min(1.0)
        } else {
            1.0
        };

        let mut ls = LineSearch {
            obj,
            x: &x,
            dir: &d,
            f0: f,
            slope0: slope,
            buf: vec![0.0; n],
        };
        let found = ls.search(alpha_init);
        let step = match found {
            Some(p) => p,
            None if !pairs.is_empty() => {
                // curvature model went stale; restart from steepest descent next round
                pairs.clear();
                iterations += 1;
                continue;
            }
            None => break,
        };

        let s: Vec<f64> = d.iter().map(|di| step.alpha * di).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        f = step.f;
        g = step.g;
        gnorm = inf_norm(&g);
        iterations += 1;
    }

    Ok(OptimResult {
        point: x,
        objective: f,
        grad_norm: gnorm,
        iterations,
        converged: gnorm <= opts.tol,
    })
}

/// Relative discrepancy between the analytic gradient and central finite differences:
/// `||g_analytic - g_fd||_2 / max(||g_analytic||_2, ||g_fd||_2, 1)`.
pub fn gradient_check<O: Objective>(obj: &mut O, x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let mut analytic = vec![0.0; n];
    obj.eval(x, &mut analytic);
    let mut scratch = vec![0.0; n];
    let mut xp = x.to_vec();
    let mut fd = vec![0.0; n];
    for i in 0..n {
        let h = step * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = obj.eval(&xp, &mut scratch);
        xp[i] = x[i] - h;
        let fm = obj.eval(&xp, &mut scratch);
        xp[i] = x[i];
        fd[i] = (fp - fm) / (2.0 * h);
    }
    let diff = analytic
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale = dot(&analytic, &analytic)
        .sqrt()
        .max(dot(&fd, &fd).sqrt())
        .max(1.0);
    diff / scale
}
