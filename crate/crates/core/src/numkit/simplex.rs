//! Dense tableau simplex with Bland's anti-cycling rule, and the zero-sum maximin solver
//! built on it.

use crate::error::{RankError, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    /// Multipliers of the `<=` constraints.
    pub dual: Vec<f64>,
    pub objective: f64,
}

/// Solves `max c'y  s.t.  A y <= b, y >= 0` for `b >= 0` (the origin is feasible).
pub fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(RankError::DimensionMismatch("constraint matrix shape".into()));
    }
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(RankError::param(
            "right-hand side must be finite and non-negative",
        ));
    }
    let width = cols + rows + 1;
    let mut t = vec![vec![0.0; width]; rows];
    for (i, row) in a.iter().enumerate() {
        t[i][..cols].copy_from_slice(row);
        t[i][cols + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    let mut z = vec![0.0; width];
    z[..cols].copy_from_slice(c);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let max_pivots = 50_000 + 100 * (rows + cols);
    for _ in 0..max_pivots {
        let Some(enter) = (0..cols + rows).find(|&j| z[j] > EPS) else {
            let mut primal = vec![0.0; cols];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < cols {
                    primal[bv] = t[i][width - 1];
                }
            }
            let dual = (0..rows).map(|i| -z[cols + i]).collect();
            return Ok(LpSolution {
                primal,
                dual,
                objective: -z[width - 1],
            });
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            return Err(RankError::Numerical("linear program is unbounded".into()));
        };
        let piv = t[p][enter];
        for v in t[p].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p {
                let f = row[enter];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = z[enter];
        for (v, pv) in z.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        basis[p] = enter;
    }
    Err(RankError::Numerical("simplex pivot limit reached".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinSolution {
    /// Row player's mixed strategy.
    pub strategy: Vec<f64>,
    pub value: f64,
}

/// Maximin mixed strategy of the row player for payoff matrix `payoff` (row player receives
/// `payoff[i][j]`): `max_x min_j sum_i x_i payoff[i][j]`.
pub fn maximin(payoff: &[Vec<f64>]) -> Result<MaximinSolution> {
    let rows = payoff.len();
    if rows == 0 {
        return Err(RankError::param("empty payoff matrix"));
    }
    let cols = payoff[0].len();
    if cols == 0 || payoff.iter().any(|r| r.len() != cols) {
        return Err(RankError::DimensionMismatch(
            "payoff matrix must be rectangular".into(),
        ));
    }
    let min = payoff.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v));
    if !min.is_finite() || payoff.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RankError::Numerical(
            "payoff matrix has non-finite entries".into(),
        ));
    }
    let shift = 1.0 - min;
    let shifted: Vec<Vec<f64>> = payoff
        .iter()
        .map(|r| r.iter().map(|v| v + shift).collect())
        .collect();
    // column player's LP; its constraint multipliers are the scaled row strategy
    let lp = simplex_max(&vec![1.0; cols], &shifted, &vec![1.0; rows])?;
    let total: f64 = lp.dual.iter().sum();
    if total <= 0.0 {
        return Err(RankError::Numerical("degenerate maximin program".into()));
    }
    let strategy: Vec<f64> = lp.dual.iter().map(|u| u.max(0.0) / total).collect();
    let norm: f64 = strategy.iter().sum();
    let strategy: Vec<f64> = strategy.iter().map(|v| v / norm).collect();
    Ok(MaximinSolution {
        strategy,
        value: 1.0 / total - shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6
        let s = simplex_max(&[3.0, 2.0], &[vec![1.0, 1.0], vec![1.0, 3.0]], &[4.0, 6.0]).unwrap();
        assert!((s.objective - 12.0).abs() < 1e-12);
        assert!((s.primal[0] - 4.0).abs() < 1e-12);
        assert!((s.dual[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies() {
        let s = maximin(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.strategy[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rock_paper_scissors() {
        let a = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
        let s = maximin(&a).unwrap();
        for p in &s.strategy {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn dominant_row() {
        let s = maximin(&[vec![0.5, 0.8], vec![0.2, 0.5]]).unwrap();
        assert!((s.strategy[0] - 1.0).abs() < 1e-12);
        assert!((s.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let c = [0.75, -150.0, 0.02, -6.0];
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0],
            vec![0.5, -90.0, -0.02, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let s = simplex_max(&c, &a, &[0.0, 0.0, 1.0]).unwrap();
        assert!((s.objective - 0.05).abs() < 1e-10);
    }
}
