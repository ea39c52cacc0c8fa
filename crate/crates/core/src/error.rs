use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid delta grid: {0}")]
    InvalidGrid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("blow-up in {system} system at t = {t}")]
    BlowUp { system: String, t: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("contraction violated at Picard iterate {iteration}: distance grew from {previous:e} to {current:e}")]
    ContractionViolation {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("quadrature did not converge: successive refinements differ by {difference:e} (|I| = {magnitude:e})")]
    Accuracy { difference: f64, magnitude: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
