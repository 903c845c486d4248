//! Stationary distributions of finite Markov chains.

use nalgebra::{DMatrix, DVector};

use crate::error::{RankError, Result};

/// Validates a row-stochastic matrix.
pub fn check_row_stochastic(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    for (i, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(RankError::DimensionMismatch(
                "transition matrix must be square".into(),
            ));
        }
        if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(RankError::Numerical(format!(
                "row {i} has a negative or non-finite entry"
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(RankError::Numerical(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// Strongly connected components (Tarjan), each listed in ascending index order.
fn components(p: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    // iterative DFS: (node, next neighbour to visit)
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < n {
                let w = *next;
                *next += 1;
                if w == v || p[v][w] <= 0.0 {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

fn solve_closed_class(p: &[Vec<f64>], class: &[usize]) -> Result<Vec<f64>> {
    let k = class.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    // (P_CC^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let mut m = DMatrix::<f64>::zeros(k, k);
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            m[(c, r)] = p[i][j];
        }
        m[(r, r)] -= 1.0;
    }
    for c in 0..k {
        m[(k - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k);
    rhs[k - 1] = 1.0;
    let pi = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| RankError::Numerical("singular stationary system".into()))?;
    Ok(pi.iter().map(|v| v.max(0.0)).collect())
}

/// Stationary distribution of a row-stochastic matrix.
///
/// An irreducible chain gets its unique stationary vector from an exact linear solve. For a
/// reducible chain the result is the limit, as the teleport weight goes to zero, of the chain
/// mixed with uniform restarts: each closed class receives the probability of being absorbed
/// into it from a uniform start and spreads it according to its own stationary vector.
pub fn stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_row_stochastic(p)?;
    let n = p.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let comps = components(p);
    let mut comp_of = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let closed: Vec<usize> = (0..comps.len())
        .filter(|&c| {
            comps[c]
                .iter()
                .all(|&i| (0..n).all(|j| p[i][j] <= 0.0 || comp_of[j] == c))
        })
        .collect();
    let transient: Vec<usize> = (0..n).filter(|&v| !closed.contains(&comp_of[v])).collect();

    // absorption probabilities h[t][k] into closed class k from transient state t
    let t = transient.len();
    let absorb: Option<DMatrix<f64>> = if t == 0 {
        None
    } else {
        let mut a = DMatrix::<f64>::identity(t, t);
        for (r, &i) in transient.iter().enumerate() {
            for (c, &j) in transient.iter().enumerate() {
                a[(r, c)] -= p[i][j];
            }
        }
        let mut rhs = DMatrix::<f64>::zeros(t, closed.len());
        for (r, &i) in transient.iter().enumerate() {
            for (k, &c) in closed.iter().enumerate() {
                rhs[(r, k)] = comps[c].iter().map(|&j| p[i][j]).sum();
            }
        }
        Some(
            a.lu()
                .solve(&rhs)
                .ok_or_else(|| RankError::Numerical("singular absorption system".into()))?,
        )
    };

    let mut pi = vec![0.0; n];
    for (k, &c) in closed.iter().enumerate() {
        let mut weight = comps[c].len() as f64;
        if let Some(h) = &absorb {
            weight += (0..t).map(|r| h[(r, k)]).sum::<f64>();
        }
        weight /= n as f64;
        let local = solve_closed_class(p, &comps[c])?;
        for (&i, v) in comps[c].iter().zip(local) {
            pi[i] = weight * v;
        }
    }
    let s: f64 = pi.iter().sum();
    Ok(pi.iter().map(|v| v / s).collect())
}
