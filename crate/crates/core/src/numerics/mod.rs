//! Scalar normal-distribution functions, dense symmetric solves and
//! finite-difference utilities shared by every estimator.

mod diff;
mod linalg;
mod normal;

pub use diff::{finite_diff_gradient, DEFAULT_FD_STEP};
pub use linalg::{check_full_rank, solve_symmetric, Cholesky, Matrix, Vector, RANK_TOL, SYMMETRY_TOL};
pub use normal::{
    log_norm_cdf, norm_cdf, norm_pdf, pdf_over_cdf, std_normal_cdf, std_normal_pdf,
    std_normal_quantile,
};
