use num_complex::Complex64;
use std::path::PathBuf;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameter (grid size, resolvent symbol, tolerance, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the domain of an operator (e.g. `Λ⁻¹` on a field with a mean).
    #[error("domain error: {0}")]
    Domain(String),

    /// Mixed grids, wrong model selector, missing prerequisite data.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("range error: {0}")]
    Range(String),

    /// Run configuration failed validation; `field` names the offending key.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("step limit of {steps} reached at t = {time}")]
    StepLimit {
        time: f64,
        steps: usize,
        state: Vec<Complex64>,
    },

    /// Non-finite state or state norm above the blow-up ceiling.
    #[error("blow-up detected at t = {time}: {reason}")]
    BlowUp {
        time: f64,
        reason: String,
        state: Vec<Complex64>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for the two integration failure kinds.
    pub fn is_integration_failure(&self) -> bool {
        matches!(self, Error::StepLimit { .. } | Error::BlowUp { .. })
    }
}
