use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("not supported: {0}")]
    Capability(String),
    #[error("outside convergence strip: {0}")]
    Strip(String),
    #[error("saddle point: {0}")]
    Saddle(String),
    #[error("accuracy target missed: partial result {partial:e}, error estimate {err_estimate:e}")]
    Accuracy { partial: f64, err_estimate: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
