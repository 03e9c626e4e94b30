use thiserror::Error;

use crate::numerics::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },

    /// A probability measure failed one of its invariants. The message names it.
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure is not centered (mean {mean})")]
    NotCentered { mean: Rational },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("malformed certificate: {0}")]
    InvalidCertificate(String),

    #[error("horizon {requested} exceeds the supported maximum {max}")]
    HorizonTooLarge { requested: usize, max: usize },

    #[error("path continues past the stopping time (stopped at step {time})")]
    AlreadyStopped { time: usize },

    #[error("rule needs an external randomization draw")]
    MissingRandomization,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
