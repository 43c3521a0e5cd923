use std::path::PathBuf;

use thiserror::Error;

use crate::WideInt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("incompatible congruences: x ≡ {r1} (mod {m1}) and x ≡ {r2} (mod {m2})")]
    Incompatible {
        m1: WideInt,
        r1: WideInt,
        m2: WideInt,
        r2: WideInt,
    },

    #[error("malformed parameters: {0}")]
    Shape(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("no decomposition found for n = {0}")]
    NotFound(WideInt),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("checkpoint {path:?} was written by a different configuration (expected {expected}, found {found})")]
    CheckpointMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
