//! Shared error type for the whole crate.

use thiserror::Error;

/// Errors produced by samplers, kernels, estimators and the experiment engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sample is too small for the kernel degree.
    #[error("sample of size {n} is smaller than the kernel degree {k}")]
    InsufficientSample { n: usize, k: usize },

    /// A ratio estimator saw zero hits in its denominator.
    #[error("exceedance probability estimated as 0 over {reps} reps; threshold too extreme for this budget")]
    UndefinedRatio { reps: u64 },

    /// The configured kernel-evaluation budget would be exceeded.
    #[error("evaluation cap exceeded: run requires {required} kernel evaluations, cap is {cap}")]
    EvalCapExceeded { required: u128, cap: u128 },

    /// A convergence-study grid is unusable.
    #[error("n-grid must be strictly increasing with at least {min} points, got {got}")]
    BadGrid { min: usize, got: usize },

    /// An experiment or CLI configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
