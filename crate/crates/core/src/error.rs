use thiserror::Error;

/// Errors raised by the statistical routines and the data pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the law or routine.
    #[error("parameter out of domain: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("insufficient data: need at least {needed}, got {got} ({context})")]
    InsufficientData {
        needed: usize,
        got: usize,
        context: &'static str,
    },

    /// Numerical fit did not produce a usable estimate.
    #[error("{family} fit failed after {iterations} iterations: {reason}")]
    FitFailure {
        family: &'static str,
        reason: String,
        iterations: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Semantically invalid input data (bad price, duplicate row, ...).
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain { name, value, reason }
    }

    pub(crate) fn insufficient(needed: usize, got: usize, context: &'static str) -> Self {
        Error::InsufficientData { needed, got, context }
    }

    pub(crate) fn fit(family: &'static str, reason: impl Into<String>, iterations: usize) -> Self {
        Error::FitFailure {
            family,
            reason: reason.into(),
            iterations,
        }
    }

    /// True for errors caused by bad input rather than a numerical fit.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::FitFailure { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
