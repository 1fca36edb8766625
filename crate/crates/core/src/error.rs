use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("distribution does not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("total masses differ: {0} vs {1}")]
    UnequalMass(f64, f64),

    #[error("instance too large for exhaustive search: {0}")]
    Capacity(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty batch")]
    EmptyBatch,

    #[error("operation `{0}` requires a preceding forward pass")]
    MissingForward(&'static str),

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
