use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("image encode failed: {0}")]
    Encode(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {count} invalid record(s):\n  {}", .issues.join("\n  "))]
    Validation {
        path: String,
        count: usize,
        issues: Vec<String>,
    },

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing entry: {0}")]
    Missing(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn validation(path: impl ToString, issues: Vec<String>) -> Self {
        Error::Validation {
            path: path.to_string(),
            count: issues.len(),
            issues,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
