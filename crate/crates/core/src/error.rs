use thiserror::Error;

pub type Result<T> = std::result::Result<T, ChicError>;

#[derive(Debug, Error)]
pub enum ChicError {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input is not mean-free (mean = {mean:e}); negative operator powers act on H0 only")]
    NonzeroMean { mean: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("blowup at step {step} (t = {time}): state norm {norm:e} exceeds threshold or is non-finite")]
    Blowup { step: usize, time: f64, norm: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular Hessian at the critical point (estimated null-space dimension {null_dim})")]
    SingularHessian { null_dim: usize },

    #[error("insufficient samples above the energy floor: {usable} usable of {requested}")]
    InsufficientSamples { usable: usize, requested: usize },

    #[error("fit requires at least {required} positive samples, got {got}")]
    InvalidSeries { required: usize, got: usize },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ChicError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ChicError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        ChicError::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}
