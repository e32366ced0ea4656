use thiserror::Error;

/// Errors raised by the exact and floating backends and by the analyses built
/// on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field mismatch: Q(beta_{{{q1},{m1}}}) vs Q(beta_{{{q2},{m2}}})")]
    FieldMismatch { q1: u32, m1: usize, q2: u32, m2: usize },

    /// A sign could not be certified within the configured number of
    /// enclosure halvings. The value is nonzero but pathologically small.
    #[error("sign refinement budget of {budget} halvings exceeded")]
    RefinementBudget { budget: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("division by zero in Q(beta)")]
    DivisionByZero,

    /// An orbit difference did not admit the signed {0,q}-word form.
    #[error("delta-word decomposition failed at step {step}: {reason}")]
    Decomposition { step: usize, reason: String },

    #[error("density is negative ({value:e}) beyond tolerance at x = {x}")]
    NegativeDensity { x: f64, value: f64 },

    #[error("normalization integral is not positive ({0:e})")]
    NonPositiveNormalization(f64),

    #[error("sum of lambda weights is not positive")]
    NonPositiveWeight,

    #[error("record has no matching")]
    Unmatched,

    /// Two independent evaluations of the same quantity disagreed.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
