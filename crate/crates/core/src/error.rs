use thiserror::Error;

/// Failures raised by the model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Replication design with power not exceeding its false-positive rate cannot be inverted.
    #[error("non-discriminating design: power {power} does not exceed alpha {alpha}")]
    NonDiscriminating { alpha: f64, power: f64 },

    /// An observed quantity falls outside the range the model can produce.
    #[error("model violation: {what} (unclamped value {value})")]
    OutOfModel { what: String, value: f64 },

    /// Leverage at or below one never reaches a reliability target.
    #[error("no finite pipeline depth: leverage {leverage} must exceed 1")]
    NoFiniteDepth { leverage: f64 },

    /// Numerical routine exhausted its budget.
    #[error("numeric error: {what} (best estimate {estimate})")]
    NonConvergence { what: String, estimate: f64 },

    /// A conditional simulation estimate had an empty denominator.
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Inputs were in domain but the model cannot produce an answer for them.
    ///
    /// Front ends report these separately from malformed arguments.
    pub fn is_model_violation(&self) -> bool {
        !matches!(self, Error::Domain(_) | Error::NonDiscriminating { .. })
    }

    /// Stable lower_snake_case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonDiscriminating { .. } => "non_discriminating",
            Error::OutOfModel { .. } => "out_of_model",
            Error::NoFiniteDepth { .. } => "no_finite_depth",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InsufficientSample(_) => "insufficient_sample",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
