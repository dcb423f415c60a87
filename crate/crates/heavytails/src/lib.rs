//! Heavy-tailed models of daily stock returns: Student-t, a two-piece
//! "half Student-t" mixture, and two modified Jones-Faddy skew-t variants,
//! together with the mean-reverting stochastic-volatility simulator that
//! generates them and the tail diagnostics (power-law fits, binomial
//! confidence bands, order-statistics outlier tests) used to analyze
//! S&P500-style return series.
//!
//! The crate is organized bottom-up:
//!
//! - [`specfun`]: log-gamma, regularized incomplete beta/gamma, adaptive
//!   quadrature, bracketed root finding. Everything else builds on these.
//! - [`distributions`]: the four return models with PDFs, gain/loss CDFs,
//!   closed-form and numeric moments, exact samplers.
//! - [`sde`]: Euler-Maruyama simulation of the return/variance SDE pair.
//! - [`data`]: price ingestion, drift detrending, empirical statistics.
//! - [`fit`]: maximum-likelihood estimation with multi-start optimizers.
//! - [`tails`]: log-log tail fits, binomial confidence bands, U-test
//!   p-values with Dragon-King flags.
//!
//! Data-parallel inner loops (path simulation, sampling, likelihood sums,
//! calibration replications) run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential execution otherwise.
//! Both modes produce identical results; `benches/parallel_vs_sequential`
//! compares their throughput.

pub mod data;
pub mod distributions;
pub mod fit;
pub mod gof;
pub mod sde;
pub mod specfun;
pub mod tails;

mod exec;

pub use exec::{par_map_collect, seq_map_collect};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: best estimate {estimate:e} with error estimate {abs_error_estimate:e} after {evaluations} evaluations")]
    QuadratureNonConvergent {
        estimate: f64,
        abs_error_estimate: f64,
        evaluations: usize,
    },
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("path {path} produced a non-finite value at step {step}")]
    PathExploded { path: usize, step: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("infinite variance: CCDF tail exponent {exponent} is not steeper than -2")]
    InfiniteVariance { exponent: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite log-likelihood at data point {index} (x = {x})")]
    NonFiniteLikelihood { index: usize, x: f64 },
    #[error("optimization failed: {0}")]
    OptimizationFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
