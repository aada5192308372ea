use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::irl::Similarity;
use crate::mdp::{normalize_features, MdpModel};

use super::{Behavior, EnvironmentBundle, Metric};

pub const COLLISION: usize = 0;
pub const OFFROAD: usize = 1;
pub const LEFT_LANES: usize = 2;
pub const RIGHT_LANES: usize = 3;

const ACTIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayParams {
    pub n_lanes: usize,
    pub horizon: usize,
    pub traffic_seed: u64,
    /// Number of rows in the repeating traffic pattern.
    pub period: usize,
    /// Probability that a lane cell of a traffic row holds a car.
    pub density: f64,
    pub reward_scale: f64,
    pub discount: f64,
}

impl Default for HighwayParams {
    fn default() -> Self {
        HighwayParams {
            n_lanes: 4,
            horizon: 100,
            traffic_seed: 0,
            period: 20,
            density: 0.3,
            reward_scale: 50.0,
            discount: 0.95,
        }
    }
}

/// Occupancy rows indexed `[phase][lane]`, lanes `0..n_lanes`. Row 0 is empty
/// and every row leaves at least one lane free.
pub fn traffic_pattern(params: &HighwayParams) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.traffic_seed);
    let mut rows = vec![vec![false; params.n_lanes]];
    for _ in 1..params.period {
        let mut row: Vec<bool> = (0..params.n_lanes)
            .map(|_| rng.random_bool(params.density))
            .collect();
        if row.iter().all(|&c| c) {
            row[rng.random_range(0..params.n_lanes)] = false;
        }
        rows.push(row);
    }
    rows
}

/// Highway with `n_lanes` lanes plus one off-road cell on each side.
///
/// A state is `(phase, position)` with positions `0..=n_lanes + 1`, where `0`
/// and `n_lanes + 1` are off-road, flattened as `phase * (n_lanes + 2) +
/// position`. Actions move one cell left, stay, or move one cell right; the
/// lateral move is applied first, then the traffic pattern scrolls by one
/// row. A collision is being in a lane cell that the current traffic row
/// occupies.
pub fn build_highway(params: &HighwayParams) -> Result<EnvironmentBundle> {
    let n_lanes = params.n_lanes;
    if n_lanes < 2 {
        return Err(invalid_param("n_lanes", format!("need at least 2 lanes, got {n_lanes}")));
    }
    if params.period < 1 {
        return Err(invalid_param("period", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(invalid_param("density", "must lie in [0, 1]"));
    }
    if !(params.reward_scale > 0.0) || !params.reward_scale.is_finite() {
        return Err(invalid_param("reward_scale", "must be positive and finite"));
    }
    if params.horizon < 1 {
        return Err(invalid_param("horizon", "must be at least 1"));
    }

    let traffic = traffic_pattern(params);
    let n_pos = n_lanes + 2;
    let period = params.period;
    let n = period * n_pos;

    let mut transition = vec![0.0; n * ACTIONS * n];
    let mut features = Vec::with_capacity(n);
    for phase in 0..period {
        for pos in 0..n_pos {
            let s = phase * n_pos + pos;
            for a in 0..ACTIONS {
                let next_pos = (pos + a).saturating_sub(1).min(n_pos - 1);
                let next = ((phase + 1) % period) * n_pos + next_pos;
                transition[(s * ACTIONS + a) * n + next] = 1.0;
            }
            let mut f = vec![0.0; 4];
            if pos == 0 || pos == n_pos - 1 {
                f[OFFROAD] = 1.0;
            } else {
                f[COLLISION] = if traffic[phase][pos - 1] { 1.0 } else { 0.0 };
                f[LEFT_LANES] = if pos <= 2 { 1.0 } else { 0.0 };
                f[RIGHT_LANES] = if pos + 1 >= n_lanes { 1.0 } else { 0.0 };
            }
            features.push(f);
        }
    }
    let mut initial = vec![0.0; n];
    initial[1..=n_lanes].fill(1.0 / n_lanes as f64);
    let raw = MdpModel::new(n, ACTIONS, transition, features, initial, params.discount, &[])?;
    let mdp = normalize_features(&raw)?;

    let s = params.reward_scale;
    let theta_star = vec![-s, -s, 0.0, 0.0];
    let theta_1 = vec![-0.2 * s, -0.2 * s, 0.0, 0.0];
    let theta_2 = vec![0.0, -s, 0.0, 0.0];

    Ok(EnvironmentBundle {
        name: "highway".into(),
        mdp,
        expert: Behavior::Reward(theta_star.clone()),
        star: Behavior::Reward(theta_star.clone()),
        alt_1: Behavior::Reward(theta_1.clone()),
        alt_2: Behavior::Reward(theta_2.clone()),
        theta_star,
        theta_1,
        theta_2,
        metric: Metric::new("collisions_and_offroad", vec![-1.0, -1.0, 0.0, 0.0]),
        default_similarity: Similarity::Rbf { sigma: 5.0 },
        horizon: params.horizon,
    })
}
