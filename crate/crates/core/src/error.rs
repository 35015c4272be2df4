//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by data ingestion, model fitting, and serialization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A cell failed to parse as a finite real number.
    #[error("invalid value {value:?} at row {row}, column {column}")]
    InvalidCell {
        row: usize,
        column: String,
        value: String,
    },

    /// Malformed or inconsistent input data.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A parameter is outside its legal range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A model file could not be understood.
    #[error("model format: {0}")]
    ModelFormat(String),

    /// A named fitting stage failed.
    #[error("fit failed for {label}: {source}")]
    Fit {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    /// Wrap an error with the label of the model that produced it.
    pub fn for_label(label: impl Into<String>, source: Error) -> Self {
        Error::Fit {
            label: label.into(),
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
