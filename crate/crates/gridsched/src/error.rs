//! Crate-wide error type. Domain functions that can only fail on contract
//! violations return [`Error::Invalid`] with the offending quantity named.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a documented precondition or invariant.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// Configuration file problems: unreadable, unparseable, or failing
    /// schema/semantic validation.
    #[error("config error: {0}")]
    Config(String),

    /// The power-balance identity was violated beyond tolerance.
    #[error("power balance violated by {residual_kw} kW at step {step}")]
    PowerBalance { step: usize, residual_kw: f64 },

    /// A linear solve could not be completed (singular system).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid { what, why: why.into() }
    }
}
