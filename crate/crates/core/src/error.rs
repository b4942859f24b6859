use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degree is ill-defined: endpoint/pi = {ratio} is {residual} away from an integer")]
    IllDefinedDegree { ratio: f64, residual: f64 },

    #[error("picard iteration did not contract (last s0 = {s0}, ratio = {ratio})")]
    NoConvergence { s0: f64, ratio: f64 },

    #[error("integration failed at s = {s}: {reason}")]
    IntegrationFailure {
        s: f64,
        reason: String,
        /// Samples computed before the failure.
        partial: Option<Box<crate::stationary::StationaryProfile>>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
