use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model coefficient is out of range (non-positive wave speed, zero coupling, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The operation is meaningless for the classified regime
    /// (e.g. asking for a decay rate of a non-decaying configuration).
    #[error("regime error: {0}")]
    Regime(String),

    /// Caller violated a precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical failure at xi = {xi}: {msg}")]
    Numerical { xi: f64, msg: String },

    /// A certification check did not hold.
    #[error("verification failure: {0}")]
    Verification(String),

    /// Frequency truncation of a Plancherel integral leaves too much mass behind.
    #[error("truncation error: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
