use thiserror::Error;

/// Errors raised by the simulation and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("multiplier `{label}` breaks real-field symmetry at k = {k}")]
    NonHermitianMultiplier { label: String, k: String },

    #[error("quadratic form `{label}` breaks Hermitian symmetry at (k, k1, k2) = {triple}")]
    NonHermitianForm { label: String, triple: String },

    #[error("step-size rule violated: {0}")]
    StepRule(String),

    #[error("numeric blow-up at t = {t}: H-norm {norm:.3e} exceeds {limit:.1e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },

    #[error("trajectory carries no noise increments")]
    MissingNoise,

    #[error("noise streams differ between resolutions: {0}")]
    StreamMismatch(String),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
