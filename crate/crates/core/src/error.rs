use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate window: zero variance in {what}")]
    DegenerateWindow { what: String },

    #[error("insufficient overlap: {overlap} points after shifting (need at least 3)")]
    InsufficientOverlap { overlap: usize },

    #[error("insufficient data: {rows} rows, need more than {needed}")]
    InsufficientData { rows: usize, needed: usize },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("timestamps not increasing at row {row}")]
    Order { row: usize },

    #[error("duplicate timestamp at row {row}")]
    Duplicate { row: usize },

    #[error("singular design matrix (rank {rank} < {columns} columns)")]
    SingularDesign { rank: usize, columns: usize },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error(
        "Painleve II integration left the Hastings-McLeod branch near s = {at:.4}; \
         choose a larger s_min"
    )]
    IntegrationBlowup { at: f64 },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("eigen-solver failed on {failed} of {total} replications")]
    Convergence { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Usage(_) => ErrorClass::Usage,
            Error::UnknownColumn(_)
            | Error::InsufficientData { .. }
            | Error::Parse { .. }
            | Error::Order { .. }
            | Error::Duplicate { .. }
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Data,
            Error::Domain(_)
            | Error::DegenerateWindow { .. }
            | Error::InsufficientOverlap { .. }
            | Error::SingularDesign { .. }
            | Error::DegenerateModel(_)
            | Error::IntegrationBlowup { .. }
            | Error::Consistency(_)
            | Error::Convergence { .. } => ErrorClass::Numeric,
        }
    }
}
