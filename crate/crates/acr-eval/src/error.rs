//! Error types shared across the toolkit.

use std::path::PathBuf;

use crate::corpus::Task;

/// Errors produced by dataset loading, tokenization, metric computation,
/// and report handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: instance {id:?}: field `{field}` must be non-empty")]
    EmptyField {
        path: PathBuf,
        line: usize,
        id: String,
        field: &'static str,
    },

    #[error("{path}:{line}: instance {id:?}: task {task} requires a reviewer comment")]
    MissingComment {
        path: PathBuf,
        line: usize,
        id: String,
        task: Task,
    },

    #[error("{path}:{line}: record declares task {found} but {expected} was requested")]
    TaskMismatch {
        path: PathBuf,
        line: usize,
        expected: Task,
        found: Task,
    },

    #[error("instance {id:?}: {message}")]
    InstanceLex { id: String, message: String },

    #[error("unterminated {kind} literal starting at byte {offset}")]
    UnterminatedLiteral { kind: &'static str, offset: usize },

    #[error("unknown abstraction id {id:?}")]
    UnknownAbstractionId { id: String },

    #[error("cannot train a subtoken model on an empty corpus")]
    EmptyCorpus,

    #[error("prediction/reference list length mismatch: {predictions} vs {references}")]
    LengthMismatch {
        predictions: usize,
        references: usize,
    },

    #[error("relative improvement is undefined for a zero baseline score")]
    UndefinedImprovement,

    #[error("cannot aggregate an empty set of metric rows")]
    EmptyRows,

    #[error("predictions reference ids absent from the dataset: {}", ids.join(", "))]
    OrphanPredictions { ids: Vec<String> },

    #[error("reports were produced from different inputs: {message}")]
    FingerprintMismatch { message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 1 for anything caused by
    /// user input, 2 for environment/internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
