use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("numeric abort: {0}")]
    Numeric(ganlab_core::Error),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("missing files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    Missing(Vec<PathBuf>),

    #[error("csv schema mismatch in {path}: {reason}")]
    Schema { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 2,
            LabError::Numeric(_) => 3,
            LabError::Verify(_) | LabError::Missing(_) => 4,
            LabError::Schema { .. } | LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }
}

impl From<ganlab_core::Error> for LabError {
    fn from(e: ganlab_core::Error) -> Self {
        match e {
            ganlab_core::Error::InvalidParameter { name, reason } => LabError::config(name, reason),
            other => LabError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
