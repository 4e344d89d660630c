use thiserror::Error;

/// Errors raised by the distribution, coupling, and bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The survival function is numerically exhausted (F(s) >= 1 - 1e-12).
    #[error("saturation at s = {at}: survival {survival:e} is below 1e-12")]
    Saturation { at: f64, survival: f64 },

    /// A moment (or moment generating function) is infinite for the family.
    #[error("divergent moment: {0}")]
    DivergentMoment(String),

    /// The densities share no common part.
    #[error("no overlap between densities (common part {kappa:e})")]
    NoOverlap { kappa: f64 },

    /// The densities coincide; residual components are undefined.
    #[error("degenerate decomposition: densities coincide (common part {kappa})")]
    DegenerateDecomposition { kappa: f64 },

    /// The coupling common part collapsed, making the bound unusable.
    #[error("vanishing overlap: {0}")]
    VanishingOverlap(String),

    /// No admissible exponential rate could be found.
    #[error("exponential bound unavailable: {0}")]
    ExponentialBoundUnavailable(String),

    /// A query fell outside the materialized part of a path.
    #[error("range error: {0}")]
    Range(String),

    /// A model specification is malformed.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable identifier, used in structured CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Saturation { .. } => "saturation",
            Error::DivergentMoment(_) => "divergent-moment",
            Error::NoOverlap { .. } => "no-overlap",
            Error::DegenerateDecomposition { .. } => "degenerate-decomposition",
            Error::VanishingOverlap(_) => "vanishing-overlap",
            Error::ExponentialBoundUnavailable(_) => "exponential-bound-unavailable",
            Error::Range(_) => "range",
            Error::InvalidModel(_) => "invalid-model",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
