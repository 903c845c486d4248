//! Normal distribution helpers and log-binomials.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::standard()
}

pub fn normal_pdf(x: f64) -> f64 {
    standard().pdf(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Upper tail `1 - Phi(x)`, accurate for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    standard().sf(x)
}

/// Standard normal quantile for `q` in `(0, 1)`.
pub fn normal_inv_cdf(q: f64) -> f64 {
    let n = standard();
    let x = n.inverse_cdf(q);
    if !x.is_finite() {
        return x;
    }
    // one Newton step tightens the library approximation
    let d = n.pdf(x);
    if d > 1e-300 {
        x - (n.cdf(x) - q) / d
    } else {
        x
    }
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        statrs::function::factorial::ln_binomial(n, k)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(sigmoid(x))`.
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_reference_values() {
        assert!((normal_inv_cdf(0.95) - 1.6448536269514722).abs() < 1e-9);
        assert!((normal_inv_cdf(0.05) + 1.6448536269514722).abs() < 1e-9);
        assert!(normal_inv_cdf(0.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let q = i as f64 / 200.0;
            let err = (normal_cdf(normal_inv_cdf(q)) - q).abs();
            assert!(err < 1e-14, "q={q} err={err}");
        }
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn stable_logistic_helpers() {
        assert!((sigmoid(800.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-12);
        assert!((log_sigmoid(0.0) + 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - 1000.0 - 2f64.ln()).abs() < 1e-12);
    }
}
