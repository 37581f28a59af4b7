use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TdamError>;

#[derive(Debug, Error)]
pub enum TdamError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("document {doc_id} has no {task} label")]
    MissingLabel { doc_id: String, task: &'static str },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("word id {id} outside vocabulary of size {size}")]
    UnknownWord { id: usize, size: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("non-finite loss in batch {batch} (epoch {epoch})")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("unknown strategy '{name}', expected one of: {known}")]
    UnknownStrategy { name: String, known: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TdamError {
    /// Short machine-readable category used by the command-line driver.
    pub fn kind(&self) -> &'static str {
        match self {
            TdamError::Shape { .. } => "shape",
            TdamError::InvalidArgument(_) => "invalid-argument",
            TdamError::LabelOutOfRange { .. } => "label-range",
            TdamError::UnknownLabel(_) => "unknown-label",
            TdamError::MissingLabel { .. } => "missing-label",
            TdamError::Empty(_) => "empty",
            TdamError::UnknownWord { .. } => "unknown-word",
            TdamError::Parse { .. } => "parse",
            TdamError::NonFiniteLoss { .. } => "non-finite-loss",
            TdamError::Checkpoint(_) => "checkpoint",
            TdamError::UnknownStrategy { .. } => "unknown-strategy",
            TdamError::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TdamError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TdamError::InvalidArgument(msg.into())
    }
}
