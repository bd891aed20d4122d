use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} did not converge: successive estimates differ by {residual:e} (tolerance {tolerance:e})")]
    Convergence { what: &'static str, residual: f64, tolerance: f64 },

    #[error("non-finite value encountered at t = {time}")]
    Numerical { time: f64 },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("near-field detector: {0}")]
    NearField(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is not `Clone`; keep the message only.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { func, msg: msg.into() }
}
