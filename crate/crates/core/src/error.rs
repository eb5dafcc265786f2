use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside its mathematical domain (e.g. a mode above `b_j`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A document parsed but violates an invariant of the data model.
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("arc ({0}, {1}) is not part of the expanded graph")]
    UnknownArc(NodeId, NodeId),

    #[error("flow decomposition failed: {0}")]
    Decomposition(String),

    #[error("precedence cycle through nodes {0:?}")]
    Cycle(Vec<NodeId>),

    #[error("assignment is missing variable `{0}`")]
    MissingVariable(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    SizeCap(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
