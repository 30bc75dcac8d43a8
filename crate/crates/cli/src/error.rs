use std::path::PathBuf;

use nlsig::NlsigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("no rows match {0}")]
    EmptySelection(String),

    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },

    #[error("dates are not strictly increasing for {key} at {date}")]
    NonMonotoneDates { key: String, date: String },

    #[error("invalid series: {0}")]
    Series(NlsigError),

    #[error("fit failed: {0}")]
    Fit(NlsigError),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for usage errors, 2 for input/output data errors, 3 for fit failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Fit(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
