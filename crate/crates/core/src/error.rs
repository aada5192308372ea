use thiserror::Error;

/// Errors produced by model construction, dynamic programming and the learners.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite feature value at state {state}, feature {feature}")]
    NonFiniteFeature { state: usize, feature: usize },

    #[error("horizon must be at least 1")]
    InvalidHorizon,

    #[error("enumeration too large: {paths} paths exceeds cap {cap}")]
    EnumerationTooLarge { paths: u128, cap: u128 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("training set has no trajectories")]
    EmptyTrainingSet,

    #[error("invalid similarity matrix: {0}")]
    InvalidSimilarity(String),

    #[error("trajectory has no actions")]
    MissingActions,

    #[error("every trajectory in the training set has zero probability")]
    NoFeasibleTrajectory,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
