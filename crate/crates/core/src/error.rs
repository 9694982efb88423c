use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SwcsError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("frame {frame} outside acquisition range {min}..={max}")]
    FrameOutOfRange { frame: i64, min: i64, max: i64 },

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SwcsError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        SwcsError::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        SwcsError::ShapeMismatch { expected: expected.to_string(), actual: actual.to_string() }
    }

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        SwcsError::Format { what, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, SwcsError>;
