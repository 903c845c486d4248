//! Exact maximum-weight linear ordering by dynamic programming over subsets.

use crate::error::{RankError, Result};

/// Largest instance handled exactly.
pub const MAX_EXACT_ORDER: usize = 16;

/// Finds an order maximizing `sum over (i placed before j) of weights[i][j]`.
///
/// Returns the order (best first) and its objective. Among optimal orders the one found first
/// when extending prefixes in ascending index order wins.
pub fn max_linear_ordering(weights: &[Vec<f64>], max_size: usize) -> Result<(Vec<usize>, f64)> {
    let n = weights.len();
    if n > max_size {
        return Err(RankError::UnsupportedSize {
            what: "models",
            size: n,
            max: max_size,
        });
    }
    if n > 25 {
        return Err(RankError::UnsupportedSize {
            what: "models",
            size: n,
            max: 25,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let full = (1usize << n) - 1;
    let mut best = vec![f64::NEG_INFINITY; full + 1];
    let mut last = vec![u8::MAX; full + 1];
    best[0] = 0.0;
    for set in 0..full {
        let base = best[set];
        if base == f64::NEG_INFINITY {
            continue;
        }
        for j in 0..n {
            if set & (1 << j) != 0 {
                continue;
            }
            // j goes directly below everything already placed
            let mut gain = 0.0;
            let mut rest = set;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                gain += weights[i][j];
                rest &= rest - 1;
            }
            let next = set | (1 << j);
            let cand = base + gain;
            if cand > best[next] {
                best[next] = cand;
                last[next] = j as u8;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let j = last[set] as usize;
        order.push(j);
        set &= !(1 << j);
    }
    order.reverse();
    Ok((order, best[full]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objective(w: &[Vec<f64>], order: &[usize]) -> f64 {
        let mut s = 0.0;
        for a in 0..order.len() {
            for b in a + 1..order.len() {
                s += w[order[a]][order[b]];
            }
        }
        s
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
    fn matches_brute_force() {
        let mut state = 7u64;
        for n in 1..=6 {
            let w: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                            if i == j {
                                0.0
                            } else {
                                ((state >> 40) % 10) as f64
                            }
                        })
                        .collect()
                })
                .collect();
            let (order, obj) = max_linear_ordering(&w, 16).unwrap();
            let brute = permutations(n)
                .iter()
                .map(|p| objective(&w, p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(obj, brute);
            assert_eq!(objective(&w, &order), obj);
        }
    }

    #[test]
    fn too_large() {
        let w = vec![vec![0.0; 17]; 17];
        assert!(matches!(
            max_linear_ordering(&w, MAX_EXACT_ORDER),
            Err(RankError::UnsupportedSize { size: 17, .. })
        ));
    }
}
