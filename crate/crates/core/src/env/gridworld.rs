use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::irl::Similarity;
use crate::mdp::{normalize_features, MdpModel};

use super::{grid_transitions, Behavior, EnvironmentBundle, Metric, GRID_ACTIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridworldParams {
    pub side: usize,
    pub macro_side: usize,
    pub success_prob: f64,
    /// Multiplies the sampled reward vectors before they drive behavior.
    pub reward_scale: f64,
    pub discount: f64,
    pub horizon: usize,
    /// Start cell `(x, y)`; starts are uniform over all cells when unset.
    pub start: Option<(usize, usize)>,
}

impl Default for GridworldParams {
    fn default() -> Self {
        GridworldParams {
            side: 8,
            macro_side: 2,
            success_prob: 0.7,
            reward_scale: 50.0,
            discount: 0.95,
            horizon: 64,
            start: None,
        }
    }
}

const N_POSITIVE: usize = 3;

/// Every component uniform on `[-1, -0.1]` except three random ones, which
/// are uniform on `[0.5, 1]`.
fn random_reward<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=-0.1)).collect();
    for i in sample(rng, d, N_POSITIVE.min(d)) {
        theta[i] = rng.random_range(0.5..=1.0);
    }
    theta
}

/// Square grid of `side × side` cells tiled by `macro_side × macro_side`
/// macro-states, each with its own one-hot feature.
pub fn build_gridworld<R: Rng + ?Sized>(
    params: &GridworldParams,
    rng: &mut R,
) -> Result<EnvironmentBundle> {
    let GridworldParams {
        side,
        macro_side,
        success_prob,
        reward_scale,
        discount,
        horizon,
        start,
    } = *params;
    if side == 0 || macro_side == 0 || side % macro_side != 0 {
        return Err(invalid_param(
            "side",
            format!("{side} is not a positive multiple of macro_side {macro_side}"),
        ));
    }
    if !(0.0..=1.0).contains(&success_prob) {
        return Err(invalid_param("success_prob", "must lie in [0, 1]"));
    }
    if !(reward_scale > 0.0) || !reward_scale.is_finite() {
        return Err(invalid_param("reward_scale", "must be positive and finite"));
    }
    if horizon < 1 {
        return Err(invalid_param("horizon", "must be at least 1"));
    }

    let per_row = side / macro_side;
    let d = per_row * per_row;
    let n = side * side;
    let features: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let (x, y) = (s % side, s / side);
            let mut f = vec![0.0; d];
            f[(y / macro_side) * per_row + x / macro_side] = 1.0;
            f
        })
        .collect();
    let initial = match start {
        None => vec![1.0 / n as f64; n],
        Some((x, y)) if x < side && y < side => {
            let mut d = vec![0.0; n];
            d[y * side + x] = 1.0;
            d
        }
        Some((x, y)) => {
            return Err(invalid_param("start", format!("({x}, {y}) is outside the grid")));
        }
    };
    let raw = MdpModel::new(
        n,
        GRID_ACTIONS,
        grid_transitions(side, success_prob),
        features,
        initial,
        discount,
        &[],
    )?;
    let mdp = normalize_features(&raw)?;

    let true_reward = random_reward(d, rng);
    let scale = |v: &[f64]| v.iter().map(|x| x * reward_scale).collect::<Vec<_>>();
    let theta_star = scale(&true_reward);
    let theta_1 = scale(&random_reward(d, rng));
    let theta_2 = scale(&random_reward(d, rng));

    Ok(EnvironmentBundle {
        name: "gridworld".into(),
        mdp,
        expert: Behavior::Reward(theta_star.clone()),
        star: Behavior::Reward(theta_star.clone()),
        alt_1: Behavior::Reward(theta_1.clone()),
        alt_2: Behavior::Reward(theta_2.clone()),
        theta_star,
        theta_1,
        theta_2,
        metric: Metric::new("true_reward", true_reward),
        default_similarity: Similarity::UnsquaredDistance { scale: 10.0 },
        horizon,
    })
}
