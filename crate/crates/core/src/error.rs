use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input sample is empty")]
    EmptyInput,

    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("negative value at index {0} (pass --allow-negative to override)")]
    NegativeValue(usize),

    #[error("stop-loss power must be positive, got {0}")]
    NonPositivePower(f64),

    #[error("sample '{label}' has {got} observations, at least {needed} required")]
    InsufficientSample {
        label: String,
        needed: usize,
        got: usize,
    },

    #[error("zero is not strictly inside the range of the pseudo-values; the likelihood ratio is on the boundary")]
    HullViolation,

    #[error("all pooled observations are identical; the test is undefined")]
    DegenerateData,

    #[error("estimated null variance is zero; the normal test is undefined")]
    DegenerateVariance,

    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeStatistic(f64),

    #[error("probability {0} is outside the open interval (0, 1)")]
    OutOfRange(f64),

    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),

    #[error("Lagrange multiplier solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
