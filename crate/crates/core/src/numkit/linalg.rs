//! Symmetric eigen-solves and pseudoinverse helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{RankError, Result};

pub(crate) fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let n = m.len();
    let c = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, c, |i, j| m[i][j])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiedler {
    pub vector: Vec<f64>,
    pub value: f64,
    /// Third-smallest eigenvalue, when it exists.
    pub next_value: Option<f64>,
    /// True when the second eigenvalue is (numerically) repeated, so the vector is not unique.
    pub degenerate: bool,
}

/// Eigenvector of the second-smallest eigenvalue of a symmetric Laplacian.
///
/// Sign convention: the entry of largest magnitude (first such index) is positive.
pub fn fiedler(laplacian: &[Vec<f64>]) -> Result<Fiedler> {
    let n = laplacian.len();
    if n < 2 {
        return Err(RankError::param("Fiedler vector needs at least two nodes"));
    }
    if laplacian.iter().any(|r| r.len() != n) {
        return Err(RankError::DimensionMismatch("Laplacian must be square".into()));
    }
    if laplacian.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RankError::Numerical("Laplacian has non-finite entries".into()));
    }
    let m = to_dmatrix(laplacian);
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let value = eig.eigenvalues[order[1]];
    let next_value = (n >= 3).then(|| eig.eigenvalues[order[2]]);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let degenerate = next_value.is_some_and(|v3| v3 - value <= 1e-10 * scale);
    let mut vector: Vec<f64> = eig.eigenvectors.column(order[1]).iter().copied().collect();
    let mut pivot = 0;
    for (i, v) in vector.iter().enumerate() {
        if v.abs() > vector[pivot].abs() + 1e-12 {
            pivot = i;
        }
    }
    if vector[pivot] < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Fiedler {
        vector,
        value,
        next_value,
        degenerate,
    })
}

type Solver = Box<dyn Fn(&DVector<f64>) -> Result<DVector<f64>>>;

/// Minimum-norm least-squares solution `A^+ b`. Symmetric matrices go through the symmetric
/// eigendecomposition, everything else through the SVD. One refinement step is applied.
pub fn pinv_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let m = to_dmatrix(a);
    if m.nrows() != b.len() {
        return Err(RankError::DimensionMismatch("right-hand side length".into()));
    }
    if m.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(RankError::Numerical(
            "non-finite entries in least-squares system".into(),
        ));
    }
    let rhs = DVector::from_column_slice(b);
    let symmetric = m.is_square() && m.relative_eq(&m.transpose(), 0.0, 0.0);
    let apply: Solver = if symmetric {
        let eig = m.clone().symmetric_eigen();
        let max_ev = eig.eigenvalues.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let eps = max_ev * 1e-12 * (a.len().max(1) as f64);
        let inv: DVector<f64> = eig.eigenvalues.map(|v| if v.abs() > eps { 1.0 / v } else { 0.0 });
        let q = eig.eigenvectors;
        Box::new(move |r| {
            let coef = q.transpose() * r;
            Ok(&q * coef.component_mul(&inv))
        })
    } else {
        let svd = m.clone().svd(true, true);
        let max_sv = svd.singular_values.iter().fold(0.0f64, |s, v| s.max(*v));
        let eps = max_sv * 1e-12 * (a.len().max(1) as f64);
        Box::new(move |r| svd.solve(r, eps).map_err(|e| RankError::Numerical(e.to_string())))
    };
    let mut x = apply(&rhs)?;
    let residual = &rhs - &m * &x;
    x += apply(&residual)?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn path_laplacian(n: usize) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            l[i][i] += 1.0;
            l[i + 1][i + 1] += 1.0;
            l[i][i + 1] -= 1.0;
            l[i + 1][i] -= 1.0;
        }
        l
    }

    #[test]
    fn path_graph_closed_form() {
        let n = 7;
        let f = fiedler(&path_laplacian(n)).unwrap();
        let lambda = 2.0 - 2.0 * (PI / n as f64).cos();
        assert!((f.value - lambda).abs() < 1e-12);
        let exact: Vec<f64> = (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect();
        let norm = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dot: f64 = exact.iter().zip(&f.vector).map(|(a, b)| a * b).sum::<f64>() / norm;
        assert!((dot.abs() - 1.0).abs() < 1e-12);
        let diffs: Vec<f64> = f.vector.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(diffs.iter().all(|d| *d < 0.0) || diffs.iter().all(|d| *d > 0.0));
        assert!(!f.degenerate);
    }

    #[test]
    fn complete_graph_is_degenerate() {
        let n = 4;
        let l: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 3.0 } else { -1.0 }).collect())
            .collect();
        assert!(fiedler(&l).unwrap().degenerate);
    }

    #[test]
    fn pinv_of_path_laplacian() {
        let l = path_laplacian(3);
        let x = pinv_solve(&l, &[1.0, 0.0, -1.0]).unwrap();
        assert!(x.iter().sum::<f64>().abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
    }
}
