use thiserror::Error;

use crate::params::CalibrationResult;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller broke an API contract (basis mismatch, non-diagonal terms
    /// handed to the diagonal path, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A resource guard (qubit count for dense or diagonal evolution) was hit.
    #[error("resource guard: {what} needs {requested} qubits, limit is {limit}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Calibration conditions cannot be met. The best attempt is attached.
    #[error("calibration infeasible: {reason} (max residual {max_residual:.3e})")]
    Calibration {
        reason: String,
        max_residual: f64,
        best: Option<Box<CalibrationResult>>,
    },

    /// A numerical routine (root bracket, quadrature) failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration document rejected.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
