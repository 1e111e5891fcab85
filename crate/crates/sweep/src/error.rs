use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed CSV record {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("cannot plot an empty curve")]
    EmptyCurve,

    #[error(transparent)]
    Library(#[from] lora_ser::Error),
}

impl SweepError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub(crate) fn config_error(field: &str, reason: impl Into<String>) -> SweepError {
    SweepError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}
