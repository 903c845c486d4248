//! Numerical building blocks shared by the ranking methods.

mod linalg;
mod markov;
mod optim;
mod ordering;
mod simplex;
mod special;

pub use linalg::{fiedler, pinv_solve, Fiedler};
pub use markov::{check_row_stochastic, stationary};
pub use optim::{gradient_check, minimize, MinimizeOptions, Objective, OptimResult};
pub use ordering::{max_linear_ordering, MAX_EXACT_ORDER};
pub use simplex::{maximin, simplex_max, LpSolution, MaximinSolution};
pub use special::{
    ln_binomial, log_sigmoid, log_sum_exp, normal_cdf, normal_inv_cdf, normal_pdf, normal_sf, sigmoid,
    softplus,
};

/// Subtracts the mean in place.
pub fn center(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}
