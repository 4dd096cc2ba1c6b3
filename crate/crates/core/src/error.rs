use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("no intersections between needles; the network is empty")]
    EmptyNetwork,

    #[error("incompatible operands: {0}")]
    IncompatibleOperands(String),

    #[error("incompatible source: |<zero mode, rho>| = {overlap:e} exceeds {tolerance:e}")]
    IncompatibleSource { overlap: f64, tolerance: f64 },

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("time step violates stability bound: {0}")]
    Stability(String),

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("unknown {family} strategy `{name}` (available: {available})")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        available: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
