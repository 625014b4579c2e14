use thiserror::Error;

/// Errors produced by the simulation crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    /// An operation was called with arguments that violate its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A configuration value failed validation before any work ran.
    #[error("configuration error: {0}")]
    Config(String),
}

impl SimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
