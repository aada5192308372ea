//! Tabular MDPs, trajectories and linear rewards.
//!
//! A model stores the full transition tensor `p(s'|s,a)` densely (that is what
//! the JSON format carries) together with a sparse successor list per
//! state-action pair used by the dynamic-programming sweeps.
//!
//! Terminal states are absorbing: a trajectory stops when it enters one and
//! the forward pass keeps the arriving mass there. After normalization a
//! terminal state carries the zero feature vector, so stopping and looping
//! forever produce the same discounted feature count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid_param, Error, Result};
use crate::math::{dot, inf_norm, sample_categorical};
use crate::policy::Policy;

const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    n_states: usize,
    n_actions: usize,
    n_features: usize,
    /// Flat `(s * n_actions + a) * n_states + s'`.
    transition: Vec<f64>,
    /// Nonzero `(s', p)` entries per `(s, a)`.
    successors: Vec<Vec<(usize, f64)>>,
    /// Flat `s * n_features + i`.
    features: Vec<f64>,
    initial_dist: Vec<f64>,
    discount: f64,
    terminal: Vec<bool>,
    normalized: bool,
}

/// Plain-data form of [`MdpModel`], used for JSON import and export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub n_states: usize,
    pub n_actions: usize,
    /// Indexed `[s][a][s']`.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// Indexed `[s][feature]`.
    pub features: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
    pub discount: f64,
    #[serde(default)]
    pub terminal_states: Vec<usize>,
    /// Set when the features have already been min-max rescaled and
    /// multiplied by `1 - discount`.
    #[serde(default)]
    pub normalized: bool,
}

impl MdpModel {
    /// Builds and validates a model from a flat transition tensor
    /// (`(s * n_actions + a) * n_states + s'`) and per-state feature rows.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        features: Vec<Vec<f64>>,
        initial_dist: Vec<f64>,
        discount: f64,
        terminal_states: &[usize],
    ) -> Result<Self> {
        Self::build(
            n_states,
            n_actions,
            transition,
            features,
            initial_dist,
            discount,
            terminal_states,
            false,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        features: Vec<Vec<f64>>,
        initial_dist: Vec<f64>,
        discount: f64,
        terminal_states: &[usize],
        normalized: bool,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidModel(
                "n_states and n_actions must be positive".into(),
            ));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::InvalidModel(format!(
                "discount must lie in (0, 1), got {discount}"
            )));
        }
        check_dim(n_states * n_actions * n_states, transition.len())?;
        check_dim(n_states, features.len())?;
        check_dim(n_states, initial_dist.len())?;

        let n_features = features[0].len();
        let mut flat_features = Vec::with_capacity(n_states * n_features);
        for (s, row) in features.iter().enumerate() {
            check_dim(n_features, row.len())?;
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteFeature {
                        state: s,
                        feature: i,
                    });
                }
            }
            flat_features.extend_from_slice(row);
        }

        let mut successors = Vec::with_capacity(n_states * n_actions);
        for sa in 0..n_states * n_actions {
            let row = &transition[sa * n_states..(sa + 1) * n_states];
            let mut sum = 0.0;
            let mut nz = Vec::new();
            for (next, &p) in row.iter().enumerate() {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "transition p(.|s={}, a={}) has invalid entry {p}",
                        sa / n_actions,
                        sa % n_actions
                    )));
                }
                if p > 0.0 {
                    nz.push((next, p));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidModel(format!(
                    "transition row p(.|s={}, a={}) sums to {sum}",
                    sa / n_actions,
                    sa % n_actions
                )));
            }
            successors.push(nz);
        }

        if initial_dist.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidModel(
                "initial distribution has a negative or non-finite entry".into(),
            ));
        }
        let init_sum: f64 = initial_dist.iter().sum();
        if (init_sum - 1.0).abs() > ROW_TOL {
            return Err(Error::InvalidModel(format!(
                "initial distribution sums to {init_sum}"
            )));
        }

        let mut terminal = vec![false; n_states];
        for &s in terminal_states {
            if s >= n_states {
                return Err(Error::InvalidModel(format!(
                    "terminal state {s} out of range"
                )));
            }
            terminal[s] = true;
        }

        let model = MdpModel {
            n_states,
            n_actions,
            n_features,
            transition,
            successors,
            features: flat_features,
            initial_dist,
            discount,
            terminal,
            normalized,
        };
        if normalized {
            model.check_normalized()?;
        }
        Ok(model)
    }

    fn check_normalized(&self) -> Result<()> {
        let upper = 1.0 - self.discount;
        for s in 0..self.n_states {
            for (i, &v) in self.features(s).iter().enumerate() {
                if v < -1e-12 || v > upper + 1e-12 {
                    return Err(Error::InvalidModel(format!(
                        "normalized feature {i} of state {s} is {v}, outside [0, {upper}]"
                    )));
                }
                if self.terminal[s] && v != 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "terminal state {s} must have zero features once normalized"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_document(doc: MdpDocument) -> Result<Self> {
        let MdpDocument {
            n_states,
            n_actions,
            transition,
            features,
            initial_dist,
            discount,
            terminal_states,
            normalized,
        } = doc;
        check_dim(n_states, transition.len())?;
        let mut flat = Vec::with_capacity(n_states * n_actions * n_states);
        for per_state in &transition {
            check_dim(n_actions, per_state.len())?;
            for row in per_state {
                check_dim(n_states, row.len())?;
                flat.extend_from_slice(row);
            }
        }
        Self::build(
            n_states,
            n_actions,
            flat,
            features,
            initial_dist,
            discount,
            &terminal_states,
            normalized,
        )
    }

    pub fn to_document(&self) -> MdpDocument {
        let transition = (0..self.n_states)
            .map(|s| {
                (0..self.n_actions)
                    .map(|a| self.transition_row(s, a).to_vec())
                    .collect()
            })
            .collect();
        MdpDocument {
            n_states: self.n_states,
            n_actions: self.n_actions,
            transition,
            features: (0..self.n_states).map(|s| self.features(s).to_vec()).collect(),
            initial_dist: self.initial_dist.clone(),
            discount: self.discount,
            terminal_states: self.terminal_states(),
            normalized: self.normalized,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MdpDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model serializes")
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn features(&self, state: usize) -> &[f64] {
        &self.features[state * self.n_features..(state + 1) * self.n_features]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    pub fn terminal_states(&self) -> Vec<usize> {
        (0..self.n_states).filter(|&s| self.terminal[s]).collect()
    }

    pub fn transition_prob(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transition[(state * self.n_actions + action) * self.n_states + next]
    }

    pub fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        let start = (state * self.n_actions + action) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    /// Nonzero `(next_state, probability)` pairs of `p(.|state, action)`.
    pub fn successors(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.successors[state * self.n_actions + action]
    }

    /// Per-state reward `θᵀf(s)` for every state.
    pub fn state_rewards(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, theta.len())?;
        Ok((0..self.n_states)
            .map(|s| dot(theta, self.features(s)))
            .collect())
    }

    fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.n_states {
            return Err(Error::InvalidTrajectory(format!(
                "state {state} out of range (n_states = {})",
                self.n_states
            )));
        }
        Ok(())
    }
}

/// Discounted feature count `Σ_t γ^t f(s_t)`, with `t = 0` at the first state.
pub fn feature_count(states: &[usize], mdp: &MdpModel) -> Result<Vec<f64>> {
    let mut out = vec![0.0; mdp.n_features()];
    let mut weight = 1.0;
    for &s in states {
        mdp.check_state(s)?;
        for (o, f) in out.iter_mut().zip(mdp.features(s)) {
            *o += weight * f;
        }
        weight *= mdp.discount();
    }
    Ok(out)
}

/// Cumulative reward `θᵀf` of a trajectory with feature count `f`.
pub fn trajectory_reward(theta: &RewardVector, f: &[f64]) -> Result<f64> {
    check_dim(theta.dim(), f.len())?;
    Ok(dot(theta.as_slice(), f))
}

/// Min-max rescales every feature dimension over the state set into `[0, 1]`
/// and multiplies the result by `1 - γ`. Constant dimensions map to zero and
/// terminal states get the zero vector. Already normalized models are
/// returned unchanged.
pub fn normalize_features(mdp: &MdpModel) -> Result<MdpModel> {
    if mdp.normalized {
        return Ok(mdp.clone());
    }
    let d = mdp.n_features;
    let scale = 1.0 - mdp.discount;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for s in 0..mdp.n_states {
        for (i, &v) in mdp.features(s).iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature {
                    state: s,
                    feature: i,
                });
            }
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let mut features = mdp.features.clone();
    for s in 0..mdp.n_states {
        let row = &mut features[s * d..(s + 1) * d];
        for i in 0..d {
            let range = hi[i] - lo[i];
            row[i] = if mdp.terminal[s] || range == 0.0 {
                0.0
            } else {
                ((row[i] - lo[i]) / range).clamp(0.0, 1.0) * scale
            };
        }
    }
    Ok(MdpModel {
        features,
        normalized: true,
        ..mdp.clone()
    })
}

/// State sequence with optional actions and its cached discounted feature count.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<usize>,
    actions: Option<Vec<usize>>,
    feature_count: Vec<f64>,
}

impl Trajectory {
    pub fn new(mdp: &MdpModel, states: Vec<usize>, actions: Option<Vec<usize>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidTrajectory("empty state sequence".into()));
        }
        if let Some(actions) = &actions {
            if actions.len() + 1 != states.len() {
                return Err(Error::InvalidTrajectory(format!(
                    "{} states need {} actions, got {}",
                    states.len(),
                    states.len() - 1,
                    actions.len()
                )));
            }
            if let Some(&a) = actions.iter().find(|&&a| a >= mdp.n_actions()) {
                return Err(Error::InvalidTrajectory(format!(
                    "action {a} out of range (n_actions = {})",
                    mdp.n_actions()
                )));
            }
        }
        let feature_count = feature_count(&states, mdp)?;
        Ok(Trajectory {
            states,
            actions,
            feature_count,
        })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn actions(&self) -> Option<&[usize]> {
        self.actions.as_deref()
    }

    pub fn feature_count(&self) -> &[f64] {
        &self.feature_count
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Linear reward parameter `θ` kept inside the ∞-norm ball of radius `theta_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    theta: Vec<f64>,
    theta_max: f64,
}

impl RewardVector {
    pub fn new(theta: Vec<f64>, theta_max: f64) -> Result<Self> {
        if !(theta_max > 0.0) {
            return Err(invalid_param("theta_max", "must be positive"));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid_param("theta", "must be finite"));
        }
        let norm = inf_norm(&theta);
        if norm > theta_max {
            return Err(invalid_param(
                "theta",
                format!("infinity norm {norm} exceeds theta_max {theta_max}"),
            ));
        }
        Ok(RewardVector { theta, theta_max })
    }

    /// Projects `theta` onto the ball before wrapping it.
    pub fn projected(theta: Vec<f64>, theta_max: f64) -> Result<Self> {
        if !(theta_max > 0.0) {
            return Err(invalid_param("theta_max", "must be positive"));
        }
        let theta = crate::irl::project_inf_ball(&theta, theta_max);
        Self::new(theta, theta_max)
    }

    pub fn zeros(dim: usize, theta_max: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], theta_max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }
}

/// Samples `s_0 ~ initial_dist`, `a_t ~ π_t(.|s_t)`, `s_{t+1} ~ p(.|s_t, a_t)`
/// for up to `horizon` states, stopping early on a terminal state.
pub fn sample_trajectory<P, R>(
    mdp: &MdpModel,
    policy: &P,
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory>
where
    P: Policy + ?Sized,
    R: Rng + ?Sized,
{
    if horizon < 1 {
        return Err(Error::InvalidHorizon);
    }
    check_dim(mdp.n_states(), policy.n_states())?;
    check_dim(mdp.n_actions(), policy.n_actions())?;
    let mut state = sample_categorical(mdp.initial_dist(), rng);
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon.saturating_sub(1));
    states.push(state);
    for t in 0..horizon - 1 {
        if mdp.is_terminal(state) {
            break;
        }
        let action = sample_categorical(policy.action_probs(t, state), rng);
        state = sample_categorical(mdp.transition_row(state, action), rng);
        actions.push(action);
        states.push(state);
    }
    Trajectory::new(mdp, states, Some(actions))
}
