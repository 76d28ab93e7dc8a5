//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building operators, validating
/// schedules, or driving an iteration.
#[derive(Debug, Error)]
pub enum Error {
    /// An averagedness constant outside the open interval ]0, 1[.
    #[error("averagedness constant must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    /// Convex-combination weights that are empty, nonpositive, or do not sum to one.
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// A slack parameter outside the open interval ]0, 1/2[.
    #[error("slack parameter must lie strictly between 0 and 1/2, got {0}")]
    InvalidEpsilon(f64),

    /// An operation that needs at least one element received none.
    #[error("{0}")]
    EmptyInput(&'static str),

    /// Two paired sequences disagree in length.
    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        /// What was being paired up.
        context: &'static str,
        /// Length of the first sequence.
        left: usize,
        /// Length of the second sequence.
        right: usize,
    },

    /// A point or operator of the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Dimension required by the receiver.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },

    /// A vector or matrix entry that is NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A relaxation parameter outside its admissible interval.
    #[error("relaxation {lambda} at index {index} outside the admissible interval with endpoints {lower} and {upper} (endpoints included: {inclusive})")]
    RelaxationOutOfRange {
        /// Iteration index at which the violation occurred.
        index: usize,
        /// Offending relaxation value.
        lambda: f64,
        /// Lower endpoint of the admissible interval.
        lower: f64,
        /// Upper endpoint of the admissible interval.
        upper: f64,
        /// Whether the endpoints belong to the interval.
        inclusive: bool,
    },

    /// A step size outside its admissible interval.
    #[error("step size {gamma} at index {index} violates the {side} bound of [{lower}, {upper}]")]
    StepSizeOutOfRange {
        /// Iteration index at which the violation occurred.
        index: usize,
        /// Offending step size.
        gamma: f64,
        /// Lower endpoint of the admissible interval.
        lower: f64,
        /// Upper endpoint of the admissible interval.
        upper: f64,
        /// Which endpoint was violated ("lower" or "upper").
        side: &'static str,
    },

    /// A gradient step too long for the declared cocoercivity modulus.
    #[error("gradient step {gamma} must stay strictly below 2*beta = {limit}")]
    GradientStepTooLarge {
        /// Offending step size.
        gamma: f64,
        /// The excluded upper endpoint `2 beta`.
        limit: f64,
    },

    /// An injected error whose norm exceeds its declared bound.
    #[error("injected error at iteration {index}, slot {slot} has norm {norm} > declared bound {bound}")]
    ErrorBoundExceeded {
        /// Iteration index of the offending sample.
        index: usize,
        /// Error slot (position in the operator product).
        slot: usize,
        /// Actual norm of the sample.
        norm: f64,
        /// Declared bound it was supposed to respect.
        bound: f64,
    },

    /// A linear map whose symmetric part has a negative eigenvalue.
    #[error("matrix is not monotone: smallest symmetric-part eigenvalue is {0}")]
    NotMonotone(f64),

    /// A linear solve that failed or produced an untrustworthy solution.
    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    /// A problem description that does not validate.
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    /// Filesystem trouble while reading specs or writing traces.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON in a spec file.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the violated bound or rule, when the
    /// error is a validation failure. Used by the CLI error report.
    pub fn bound_name(&self) -> Option<&'static str> {
        match self {
            Error::InvalidAlpha(_) => Some("alpha_range"),
            Error::InvalidWeights(_) => Some("weights"),
            Error::InvalidEpsilon(_) => Some("epsilon_range"),
            Error::RelaxationOutOfRange { .. } => Some("lambda_range"),
            Error::StepSizeOutOfRange { side, .. } => {
                if *side == "lower" {
                    Some("gamma_lower")
                } else {
                    Some("gamma_upper")
                }
            }
            Error::GradientStepTooLarge { .. } => Some("gamma_upper"),
            Error::ErrorBoundExceeded { .. } => Some("error_bound"),
            Error::NotMonotone(_) => Some("monotonicity"),
            _ => None,
        }
    }

    /// Whether this error is an input/validation problem (as opposed to a
    /// numerical failure at run time).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::SolverFailure(_) | Error::NonFinite(_))
    }
}
