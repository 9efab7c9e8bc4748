use thiserror::Error;

/// Errors raised by the inference, dynamics, objective and planning layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{context}: parameter {name} = {value} outside its domain")]
    Domain {
        context: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("integration produced a non-finite state")]
    NonFiniteState,

    #[error("gap potential evaluated to a non-finite value at theta = {theta:?}")]
    Evaluation { theta: Vec<f64> },

    #[error("kernel {0} is not supported for Stein discrepancy estimation")]
    UnsupportedKernel(&'static str),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
