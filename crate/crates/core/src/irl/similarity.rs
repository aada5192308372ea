use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid_param, Error, Result};
use crate::math::{l2_distance, squared_distance};
use crate::mdp::Trajectory;

/// RBF kernel on feature counts: `exp(-‖fa - fb‖² / (2σ))`.
pub fn rbf_similarity(fa: &[f64], fb: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid_param("sigma", "must be positive"));
    }
    check_dim(fa.len(), fb.len())?;
    Ok((-squared_distance(fa, fb) / (2.0 * sigma)).exp())
}

/// Exponential kernel on the unsquared distance: `exp(-‖fa - fb‖ / scale)`.
pub fn unsquared_distance_similarity(fa: &[f64], fb: &[f64], scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(invalid_param("scale", "must be positive"));
    }
    check_dim(fa.len(), fb.len())?;
    Ok((-l2_distance(fa, fb) / scale).exp())
}

/// Number of direction changes, i.e. indices where consecutive actions differ.
pub fn turn_count(trajectory: &Trajectory) -> Result<usize> {
    let actions = trajectory.actions().ok_or(Error::MissingActions)?;
    Ok(actions.windows(2).filter(|w| w[0] != w[1]).count())
}

/// `exp(-|n(a) - n(b)|)` where `n` counts direction changes.
pub fn turn_count_similarity(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let (na, nb) = (turn_count(a)? as f64, turn_count(b)? as f64);
    Ok((-(na - nb).abs()).exp())
}

/// Similarity function used to fill a training set's pairwise matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Similarity {
    Rbf { sigma: f64 },
    UnsquaredDistance { scale: f64 },
    TurnCount,
}

impl Similarity {
    pub fn eval(&self, a: &Trajectory, b: &Trajectory) -> Result<f64> {
        match *self {
            Similarity::Rbf { sigma } => rbf_similarity(a.feature_count(), b.feature_count(), sigma),
            Similarity::UnsquaredDistance { scale } => {
                unsquared_distance_similarity(a.feature_count(), b.feature_count(), scale)
            }
            Similarity::TurnCount => turn_count_similarity(a, b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Similarity::Rbf { .. } => "rbf",
            Similarity::UnsquaredDistance { .. } => "unsquared_distance",
            Similarity::TurnCount => "turn_count",
        }
    }
}
