//! Initial activation levels: population preference means for untestable
//! claims, likelihood-ratio investigations for testable ones.

mod investigation;
mod preference;

use thiserror::Error;

pub use investigation::{
    authenticity_to_activation, claim_authenticity, decide, likelihood_ratio, log_likelihood_ratio, AuthenticityReport,
    GaussianPair, Hypothesis, InvestigationConfig, InvestigationModel, Method, MethodKind, ObservationFamily,
    MIN_TRIALS,
};
pub use preference::{expected_preference, PreferenceDistribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error("preference support point {0} lies outside [-1, 1]")]
    OutOfSupport(f64),
    #[error("distribution masses sum to {0}, not 1")]
    Unnormalized(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid investigation model: {0}")]
    InvalidModel(String),
    #[error("expected {expected} observations, got {got}")]
    ObservationCount { expected: usize, got: usize },
    #[error("observation family has no closed-form detection probability")]
    ClosedFormUnavailable,
    #[error("monte carlo needs at least {min} trials, got {got}")]
    TooFewTrials { got: u64, min: u64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
}
