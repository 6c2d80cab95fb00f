use thiserror::Error;

/// Errors raised by the spectral operators, the solver, and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative-order multiplier applied to a field with nonzero mean {mean:e}")]
    NegativeOrderOnNonzeroMean { mean: f64 },

    #[error("inverse Laplacian applied to a field with nonzero mean {mean:e}")]
    NonzeroMean { mean: f64 },

    #[error("field `{field}` contains a non-finite value")]
    NonFinite { field: &'static str },

    #[error("density must stay positive (min value {min:e})")]
    DensityNonpositive { min: f64 },

    #[error("pressure iteration did not converge: {iterations} iterations, relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("snapshot time {next} does not follow {prev}")]
    NonMonotoneTime { prev: f64, next: f64 },

    #[error("need at least {needed} positive samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid mismatch: expected {expected} points, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
