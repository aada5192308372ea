//! Benchmark environments: a macro-state grid-world, a lane-changing highway
//! and a grid with a pit in the middle.
//!
//! Every builder returns an [`EnvironmentBundle`]: a normalized model, the
//! expert reward and two alternatives, the behaviors the data generators
//! sample from, and the metric used to score learned rewards.

mod gridworld;
mod highway;
mod pit;

pub use gridworld::{build_gridworld, GridworldParams};
pub use highway::{build_highway, traffic_pattern, HighwayParams};
pub use pit::{build_pit, pit_feature, pit_policies, PitParams};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::irl::Similarity;
use crate::math::dot;
use crate::mdp::{MdpModel, RewardVector};
use crate::policy::TabularPolicy;
use crate::soft_dp::soft_feature_expectation;

/// Something trajectories can be sampled from.
#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// The soft policy `P(·|θ)` of a reward vector.
    Reward(Vec<f64>),
    /// A fixed scripted policy.
    Policy(TabularPolicy),
    /// Per-trajectory mixture; weights sum to one.
    Mixture(Vec<(Behavior, f64)>),
}

/// A linear performance functional `wᵀf` of an expected feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub weights: Vec<f64>,
}

impl Metric {
    pub fn new(name: impl Into<String>, weights: Vec<f64>) -> Self {
        Metric {
            name: name.into(),
            weights,
        }
    }

    pub fn evaluate(&self, feature_count: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), feature_count.len())?;
        Ok(dot(&self.weights, feature_count))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentBundle {
    pub name: String,
    /// Normalized model.
    pub mdp: MdpModel,
    pub theta_star: Vec<f64>,
    pub theta_1: Vec<f64>,
    pub theta_2: Vec<f64>,
    pub metric: Metric,
    pub default_similarity: Similarity,
    /// Trajectory length in states.
    pub horizon: usize,
    /// Source of the expert demonstrations.
    pub expert: Behavior,
    /// `P_{u*}`: the expert distribution as seen by the unsupervised sampler.
    pub star: Behavior,
    /// `P₁`.
    pub alt_1: Behavior,
    /// `P₂`.
    pub alt_2: Behavior,
}

impl EnvironmentBundle {
    pub fn n_features(&self) -> usize {
        self.mdp.n_features()
    }
}

/// Metric of the soft policy of `theta` over `horizon` states.
pub fn evaluate_policy(bundle: &EnvironmentBundle, theta: &RewardVector, horizon: usize) -> Result<f64> {
    check_dim(bundle.n_features(), theta.dim())?;
    let (_, fc) = soft_feature_expectation(&bundle.mdp, theta, horizon)?;
    bundle.metric.evaluate(&fc)
}

/// Noisy four-way grid moves shared by the grid-world and the pit.
///
/// Cells are indexed `y * side + x` with `(0, 0)` in the bottom-left corner.
/// Actions are up, down, left, right; the intended move happens with
/// probability `success_prob` and each of the other three moves with
/// `(1 - success_prob) / 3`. Moving into a wall leaves the agent in place.
pub(crate) fn grid_transitions(side: usize, success_prob: f64) -> Vec<f64> {
    let n = side * side;
    let slip = (1.0 - success_prob) / 3.0;
    let mut t = vec![0.0; n * GRID_ACTIONS * n];
    for s in 0..n {
        for a in 0..GRID_ACTIONS {
            for b in 0..GRID_ACTIONS {
                let p = if a == b { success_prob } else { slip };
                if p > 0.0 {
                    t[(s * GRID_ACTIONS + a) * n + grid_move(side, s, b)] += p;
                }
            }
        }
    }
    t
}

pub(crate) const GRID_ACTIONS: usize = 4;
pub(crate) const UP: usize = 0;
pub(crate) const DOWN: usize = 1;
pub(crate) const LEFT: usize = 2;
pub(crate) const RIGHT: usize = 3;

pub(crate) fn grid_move(side: usize, state: usize, action: usize) -> usize {
    let (x, y) = (state % side, state / side);
    let (x, y) = match action {
        UP => (x, (y + 1).min(side - 1)),
        DOWN => (x, y.saturating_sub(1)),
        LEFT => (x.saturating_sub(1), y),
        _ => ((x + 1).min(side - 1), y),
    };
    y * side + x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_rows_by_hand() {
        let t = grid_transitions(3, 0.7);
        let row = |s: usize, a: usize| &t[(s * 4 + a) * 9..(s * 4 + a + 1) * 9];
        // top-left corner (0, 2) = state 6: up and left both bump a wall
        let up = row(6, UP);
        assert!((up[6] - (0.7 + 0.1)).abs() < 1e-12);
        assert!((up[3] - 0.1).abs() < 1e-12);
        assert!((up[7] - 0.1).abs() < 1e-12);
        assert!((up.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // bottom-left corner moving right
        let right = row(0, RIGHT);
        assert!((right[1] - 0.7).abs() < 1e-12);
        assert!((right[0] - 0.2).abs() < 1e-12);
        assert!((right[3] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn deterministic_rows_are_one_hot() {
        let t = grid_transitions(4, 1.0);
        for row in t.chunks(16) {
            assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), 15);
        }
    }

    #[test]
    fn metric_checks_dimension() {
        let m = Metric::new("m", vec![1.0, -1.0]);
        assert_eq!(m.evaluate(&[0.5, 0.25]).unwrap(), 0.25);
        assert!(m.evaluate(&[0.5]).is_err());
    }
}
