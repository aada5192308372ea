use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::irl::Similarity;
use crate::mdp::{normalize_features, MdpModel};
use crate::policy::TabularPolicy;

use super::{grid_transitions, Behavior, EnvironmentBundle, Metric, DOWN, GRID_ACTIONS, LEFT, RIGHT, UP};

pub const LEFT_EDGE: usize = 0;
pub const RIGHT_EDGE: usize = 1;
pub const PIT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitParams {
    pub side: usize,
    pub success_prob: f64,
    pub reward_scale: f64,
    pub discount: f64,
    pub horizon: usize,
}

impl Default for PitParams {
    fn default() -> Self {
        PitParams {
            side: 6,
            success_prob: 0.85,
            reward_scale: 50.0,
            discount: 0.9,
            horizon: 24,
        }
    }
}

/// Feature index of cell `(x, y)`, or `None` for the two diagonal corners.
///
/// The outer ring is split by the main diagonal: cells above it (`y > x`,
/// the left column and the top row) form the left edge, cells below it (the
/// bottom row and the right column) the right edge. Every interior cell is
/// pit.
pub fn pit_feature(side: usize, x: usize, y: usize) -> Option<usize> {
    let on_ring = x == 0 || y == 0 || x == side - 1 || y == side - 1;
    if !on_ring {
        Some(PIT)
    } else if y > x {
        Some(LEFT_EDGE)
    } else if y < x {
        Some(RIGHT_EDGE)
    } else {
        None
    }
}

/// Scripted policies `(counter_clockwise, clockwise, crossing)`.
///
/// On the ring both edge policies follow the shorter way to the goal corner;
/// they differ at the start (right first vs up first) and in how they leave
/// the pit (towards the bottom/right vs the left/top edge). The crossing
/// policy climbs a staircase along the diagonal.
pub fn pit_policies(side: usize) -> Result<(TabularPolicy, TabularPolicy, TabularPolicy)> {
    let last = side - 1;
    let cells = || (0..side * side).map(|s| (s % side, s / side));
    let ring = |x: usize, y: usize| {
        if x == last || (y == 0 && x > 0) {
            Some(if x == last { UP } else { RIGHT })
        } else if (x == 0 && y > 0) || y == last {
            Some(if y == last { RIGHT } else { UP })
        } else {
            None
        }
    };
    let ccw: Vec<usize> = cells()
        .map(|(x, y)| match ring(x, y) {
            Some(a) => a,
            None if x == 0 && y == 0 => RIGHT,
            None if y < last - x => DOWN,
            None => RIGHT,
        })
        .collect();
    let cw: Vec<usize> = cells()
        .map(|(x, y)| match ring(x, y) {
            Some(a) => a,
            None if x == 0 && y == 0 => UP,
            None if x < last - y => LEFT,
            None => UP,
        })
        .collect();
    let cross: Vec<usize> = cells()
        .map(|(x, y)| if x <= y && x < last { RIGHT } else { UP })
        .collect();
    Ok((
        TabularPolicy::deterministic(&ccw, GRID_ACTIONS)?,
        TabularPolicy::deterministic(&cw, GRID_ACTIONS)?,
        TabularPolicy::deterministic(&cross, GRID_ACTIONS)?,
    ))
}

/// Square grid with a pit inside a one-cell edge. The agent starts in the
/// bottom-left corner; the top-right corner is terminal.
pub fn build_pit(params: &PitParams) -> Result<EnvironmentBundle> {
    let side = params.side;
    if side < 3 {
        return Err(invalid_param("side", format!("need at least 3, got {side}")));
    }
    if !(0.0..=1.0).contains(&params.success_prob) {
        return Err(invalid_param("success_prob", "must lie in [0, 1]"));
    }
    if !(params.reward_scale > 0.0) || !params.reward_scale.is_finite() {
        return Err(invalid_param("reward_scale", "must be positive and finite"));
    }
    if params.horizon < 1 {
        return Err(invalid_param("horizon", "must be at least 1"));
    }

    let n = side * side;
    let features: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut f = vec![0.0; 3];
            if let Some(i) = pit_feature(side, s % side, s / side) {
                f[i] = 1.0;
            }
            f
        })
        .collect();
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;
    let raw = MdpModel::new(
        n,
        GRID_ACTIONS,
        grid_transitions(side, params.success_prob),
        features,
        initial,
        params.discount,
        &[n - 1],
    )?;
    let mdp = normalize_features(&raw)?;

    let (ccw, cw, cross) = pit_policies(side)?;
    let s = params.reward_scale;
    Ok(EnvironmentBundle {
        name: "pit".into(),
        mdp,
        theta_star: vec![0.0, 0.0, -s],
        theta_1: vec![0.0, 0.0, s],
        theta_2: vec![0.0; 3],
        expert: Behavior::Policy(ccw.clone()),
        star: Behavior::Mixture(vec![(Behavior::Policy(cw), 0.5), (Behavior::Policy(ccw), 0.5)]),
        alt_1: Behavior::Policy(cross),
        alt_2: Behavior::Reward(vec![0.0; 3]),
        metric: Metric::new("pit_avoidance", vec![0.0, 0.0, -1.0]),
        default_similarity: Similarity::TurnCount,
        horizon: params.horizon,
    })
}
