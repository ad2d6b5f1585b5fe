//! Welch two-sample t-tests and the special functions behind them.

mod special;
mod welch;

use thiserror::Error;

pub use special::{
    ln_beta, ln_gamma, regularized_incomplete_beta, t_cdf, t_pdf, t_quantile, t_sf, t_two_sided_p,
};
pub use welch::{mean_interval, summarize, welch_test, welch_test_samples, GroupSummary, WelchResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("non-finite input value")]
    NonFinite,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("standard error is zero (both groups have zero variance)")]
    ZeroStandardError,
    #[error("continued fraction did not converge")]
    ConvergenceFailure,
}
