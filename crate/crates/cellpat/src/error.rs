//! Error type shared by the whole crate.

use crate::cell::ValidationReport;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input text; positions are 1-based.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed input that does not describe a usable value.
    #[error("{0}")]
    Semantic(String),

    /// A cell or network spec that fails structural validation.
    #[error("invalid architecture:\n{0}")]
    InvalidSpec(ValidationReport),

    #[error("unknown search space `{0}` (expected `darts` or `nb201`)")]
    UnknownSearchSpace(String),

    #[error("unknown operation `{0}`")]
    UnknownOperation(String),

    /// Caller violated an operation precondition.
    #[error("{0}")]
    InvalidArgument(String),

    #[error("feature schema mismatch: model uses `{model}`, architecture needs `{arch}`")]
    SchemaMismatch { model: String, arch: String },

    #[error("normal equations are singular at lambda = 0; refit with lambda > 0")]
    SingularSystem,

    #[error("dataset row {row}: {message}")]
    DatasetRow { row: usize, message: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("external adapter: {0}")]
    Adapter(String),

    #[error("plan does not match this spec: {0}")]
    PlanMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
