use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters or configuration.
    Config,
    /// Malformed or inconsistent input data.
    Data,
    /// A numerical routine failed (non-convergence, singular system).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("invalid date `{0}` (expected YYYY-MM-DD)")]
    InvalidDate(String),

    #[error("corpus mixes dated and undated documents ({dated} dated, {undated} undated)")]
    MixedDating { dated: usize, undated: usize },

    #[error(
        "vocabulary is empty with min_doc_count={min_doc_count}, max_doc_fraction={max_doc_fraction}; \
         lower min_doc_count or raise max_doc_fraction"
    )]
    EmptyVocabulary {
        min_doc_count: usize,
        max_doc_fraction: f64,
    },

    #[error("feature intersection is empty")]
    EmptyIntersection,

    #[error("class `{0}` has no members")]
    EmptyClass(String),

    #[error("class `{class}` has {size} members, fewer than k={k} folds")]
    ClassTooSmall { class: String, size: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("documents with no tokens: {}", .0.join(", "))]
    EmptyDocuments(Vec<String>),

    #[error("record {record}: unknown category `{category}`")]
    UnknownCategory { record: String, category: String },

    #[error("unknown topic id {topic} (model has {k} topics)")]
    UnknownTopic { topic: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypothesis spec: {0}")]
    Spec(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Spec(_) | Error::UnknownTopic { .. } => ErrorKind::Config,
            Error::Numeric(_) => ErrorKind::Numeric,
            Error::Context { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    /// Wraps the error with a location such as a grid point or sweep run.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
