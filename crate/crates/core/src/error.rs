use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building or running experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("cell `{cell}`: {reason}")]
    InvalidCell { cell: String, reason: String },

    #[error("unknown preset `{0}` (expected one of: synthetic-k4, synthetic-k10, synthetic-k20, dose-finding)")]
    UnknownPreset(String),

    #[error("duplicate cell name `{0}`")]
    DuplicateCell(String),

    #[error("no unlabeled arms left to select from")]
    NoUnlabeledArms,

    #[error("traces were recorded without action logs")]
    MissingActionLog,

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
