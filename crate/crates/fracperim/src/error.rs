//! Error type shared by every module.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Body has zero (or numerically vanishing) volume.
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    /// A parameter is outside its admissible range (s outside (0,1), zero samples, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A geometric precondition failed (point not interior, origin not interior, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    /// Fixed-point normalization of a radial set did not converge.
    #[error("normalization failed: {0}")]
    NormalizationFailed(String),
    /// Two estimates of the same quantity disagree beyond what their errors allow.
    #[error("estimator inconsistency: {0}")]
    EstimatorInconsistency(String),
    /// Ratio of two quantities that both vanish (0/0), reported distinctly from failure.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    /// Two-ball configuration: separation below the documented disjointness criterion.
    #[error("separation too small: need at least {required}, got {actual}")]
    SeparationTooSmall { required: f64, actual: f64 },
    /// Not enough rows/members to perform a fit or family check.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Internal invariant broke (non-finite intermediate, ray failed to exit, ...).
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable reason code (one per variant).
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegenerateBody(_) => "DEGENERATE_BODY",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::Precondition(_) => "PRECONDITION",
            Error::UnsupportedDimension(_) => "UNSUPPORTED_DIMENSION",
            Error::NormalizationFailed(_) => "NORMALIZATION_FAILED",
            Error::EstimatorInconsistency(_) => "ESTIMATOR_INCONSISTENCY",
            Error::UndefinedRatio(_) => "UNDEFINED_RATIO",
            Error::SeparationTooSmall { .. } => "SEPARATION_TOO_SMALL",
            Error::InsufficientData(_) => "INSUFFICIENT_DATA",
            Error::Internal(_) => "INTERNAL",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
