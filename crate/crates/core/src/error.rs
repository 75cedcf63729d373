use thiserror::Error;

/// Errors raised by the analytic solvers and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates a stated precondition (negative rate, threshold
    /// above file size, index outside its range, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The arguments are individually valid but the quantity is undefined
    /// for this regime, e.g. a mean starvation interval when rho >= 1.
    #[error("outside model domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
