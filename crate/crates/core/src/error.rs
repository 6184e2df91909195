use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("duplicate element index {0}")]
    DuplicateIndex(usize),
    #[error("element index {index} out of range for {n} elements")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trajectory incomplete after {steps} steps")]
    IncompleteTrajectory { steps: usize },
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("message passing step has no active sets")]
    EmptyStep,
    #[error("instance has {n} elements, brute force supports at most {max}")]
    SizeExceeded { n: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInstance(_) => "invalid-instance",
            Error::Infeasible(_) => "infeasible-instance",
            Error::DuplicateIndex(_) => "duplicate-index",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::InvalidConfig(_) => "invalid-config",
            Error::IncompleteTrajectory { .. } => "incomplete-trajectory",
            Error::Mismatch(_) => "mismatch",
            Error::EmptyStep => "empty-step",
            Error::SizeExceeded { .. } => "size-exceeded",
            Error::Unsupported(_) => "unsupported",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
