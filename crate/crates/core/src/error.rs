use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Every variant names the module that failed so that front ends can report
/// it together with the quantitative residual.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{module}: invalid parameter: {message}")]
    InvalidParameter {
        module: &'static str,
        message: String,
    },

    #[error("{module}: domain error: {message}")]
    Domain {
        module: &'static str,
        message: String,
    },

    #[error("{module}: accuracy error: {message} (residual {residual:.3e})")]
    Accuracy {
        module: &'static str,
        message: String,
        residual: f64,
    },

    #[error("{module}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        module: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{module}: numerical failure: {message}")]
    Numerical {
        module: &'static str,
        message: String,
    },

    #[error("{module}: configuration error: {message}")]
    Config {
        module: &'static str,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(module: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn accuracy(module: &'static str, message: impl Into<String>, residual: f64) -> Self {
        Error::Accuracy {
            module,
            message: message.into(),
            residual,
        }
    }

    pub(crate) fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn config(module: &'static str, message: impl Into<String>) -> Self {
        Error::Config {
            module,
            message: message.into(),
        }
    }

    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidParameter { module, .. }
            | Error::Domain { module, .. }
            | Error::Accuracy { module, .. }
            | Error::NonConvergence { module, .. }
            | Error::Numerical { module, .. }
            | Error::Config { module, .. } => module,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
