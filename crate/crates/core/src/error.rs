use alloc::string::String;

/// Errors raised by the simulation and fitting routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition. `param` names the
    /// offending quantity using the field name of the owning type.
    #[error("{param}: {reason}")]
    Domain { param: &'static str, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { param, reason: reason.into() }
    }

    pub fn numerical(reason: impl Into<String>) -> Self {
        Error::Numerical(reason.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
