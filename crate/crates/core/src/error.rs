use thiserror::Error;

/// Errors raised by the trajectory toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("position {x} outside domain [{x_min}, {x_max}]")]
    OutOfDomain { x: f64, x_min: f64, x_max: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// Evaluation hit a node of the wavefunction where the requested
    /// quantity diverges.
    #[error("singular at x = {x}")]
    Singular { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
