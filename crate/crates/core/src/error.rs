use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The signal/ACR model cannot support the requested operation.
    #[error("model error: {0}")]
    Model(String),

    /// A covariance matrix could not be factorized even after jitter.
    #[error("covariance error: {0}")]
    Covariance(String),

    /// Design constraints admit no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Malformed configuration or preset input.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
