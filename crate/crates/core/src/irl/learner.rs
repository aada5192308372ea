//! MaxEnt-IRL and its semi-supervised extension as projected gradient ascent.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid_param, Result};
use crate::math::{inf_norm, l2_distance};
use crate::mdp::{MdpModel, RewardVector, Trajectory};
use crate::soft_dp::{
    backward_pass, expected_feature_count, finite_horizon_backward_pass, forward_pass, Horizon,
    SoftPolicy, DEFAULT_MAX_SWEEPS, DEFAULT_TOL,
};

use super::penalty::{pairwise_penalty, penalty_gradient, TrainingSet};

/// Which backward pass produces the policy at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Planner {
    /// Exact time-indexed pass over `horizon` states.
    FiniteHorizon,
    /// Stationary discounted soft value iteration.
    Discounted { tol: f64, max_sweeps: usize },
}

impl Planner {
    pub fn discounted() -> Self {
        Planner::Discounted {
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Number of gradient steps `T`.
    pub iterations: usize,
    pub theta_max: f64,
    /// Regularizer; the effective penalty weight is `lambda0 / theta_max`.
    pub lambda0: f64,
    pub step_size: f64,
    /// Seeds the initial reward vector.
    pub seed: u64,
    /// Trajectory length (in states) for the backward and forward passes.
    pub horizon: usize,
    pub planner: Planner,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            iterations: 100,
            theta_max: 500.0,
            lambda0: 0.05,
            step_size: 1.0,
            seed: 0,
            horizon: 64,
            planner: Planner::FiniteHorizon,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(invalid_param("iterations", "must be at least 1"));
        }
        if !(self.theta_max > 0.0) || !self.theta_max.is_finite() {
            return Err(invalid_param("theta_max", "must be positive and finite"));
        }
        if !(self.lambda0 >= 0.0) || !self.lambda0.is_finite() {
            return Err(invalid_param("lambda0", "must be non-negative and finite"));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(invalid_param("step_size", "must be positive and finite"));
        }
        if self.horizon < 1 {
            return Err(invalid_param("horizon", "must be at least 1"));
        }
        Ok(())
    }

    /// `λ₀ / θ_max`.
    pub fn penalty_weight(&self) -> f64 {
        self.lambda0 / self.theta_max
    }
}

/// Rescales `theta` onto the ∞-norm ball of radius `theta_max` when it lies outside.
pub fn project_inf_ball(theta: &[f64], theta_max: f64) -> Vec<f64> {
    let norm = inf_norm(theta);
    if norm <= theta_max {
        return theta.to_vec();
    }
    let scale = theta_max / norm;
    theta
        .iter()
        .map(|&v| (v * scale).clamp(-theta_max, theta_max))
        .collect()
}

/// One projected ascent step on `L(θ) - (λ₀/θ_max) R(θ)`:
/// `θ ← Π(θ + η[(f* - f_t) - (λ₀/θ_max) ∇R(θ)])`.
pub fn messi_step(
    theta: &RewardVector,
    ts: &TrainingSet,
    expected_fc: &[f64],
    cfg: &LearnerConfig,
) -> Result<RewardVector> {
    check_dim(ts.n_features(), theta.dim())?;
    check_dim(ts.n_features(), expected_fc.len())?;
    let mut direction: Vec<f64> = ts
        .expert_mean_fc()
        .iter()
        .zip(expected_fc)
        .map(|(fs, ft)| fs - ft)
        .collect();
    if cfg.lambda0 > 0.0 {
        let weight = cfg.penalty_weight();
        for (d, g) in direction.iter_mut().zip(penalty_gradient(theta, ts)?) {
            *d -= weight * g;
        }
    }
    ascend(theta, &direction, cfg)
}

pub(crate) fn ascend(
    theta: &RewardVector,
    direction: &[f64],
    cfg: &LearnerConfig,
) -> Result<RewardVector> {
    let stepped: Vec<f64> = theta
        .as_slice()
        .iter()
        .zip(direction)
        .map(|(t, d)| t + cfg.step_size * d)
        .collect();
    RewardVector::projected(stepped, cfg.theta_max)
}

/// Uniform on `[-1, 1]` per component, drawn from `cfg.seed`.
pub fn initial_theta(dim: usize, cfg: &LearnerConfig) -> Result<RewardVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let theta = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    RewardVector::projected(theta, cfg.theta_max)
}

/// Backward pass with the configured planner, then a forward pass over
/// `cfg.horizon` states.
pub fn policy_and_expected_fc(
    mdp: &MdpModel,
    theta: &RewardVector,
    cfg: &LearnerConfig,
) -> Result<(SoftPolicy, Vec<f64>)> {
    let policy = match cfg.planner {
        Planner::FiniteHorizon => finite_horizon_backward_pass(mdp, theta, cfg.horizon)?,
        Planner::Discounted { tol, max_sweeps } => backward_pass(mdp, theta, tol, max_sweeps)?,
    };
    let rho = forward_pass(mdp, &policy, Horizon::Finite(cfg.horizon))?;
    let fc = expected_feature_count(mdp, &rho)?;
    Ok((policy, fc))
}

/// One row of a learner's history: `θ_t` and the expected feature count `f_t`
/// of its soft policy.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub expected_fc: Vec<f64>,
    /// `‖f* - f_t‖₂` against the expert mean feature count.
    pub mismatch: f64,
    /// `R(θ_t)`; only tracked when the penalty is active.
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerRun {
    pub theta: RewardVector,
    /// `T + 1` rows: iterations `0..T` plus the final reward vector.
    pub history: Vec<IterationRecord>,
}

impl LearnerRun {
    pub fn final_record(&self) -> &IterationRecord {
        self.history.last().expect("history is never empty")
    }
}

/// Projected gradient ascent on the penalized MaxEnt log-likelihood.
pub fn run_messi(mdp: &MdpModel, ts: &TrainingSet, cfg: &LearnerConfig) -> Result<LearnerRun> {
    cfg.validate()?;
    check_dim(mdp.n_features(), ts.n_features())?;
    let mut theta = initial_theta(mdp.n_features(), cfg)?;
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    for t in 0..=cfg.iterations {
        let (_, fc) = policy_and_expected_fc(mdp, &theta, cfg)?;
        let penalty = if cfg.lambda0 > 0.0 {
            Some(pairwise_penalty(&theta, ts)?)
        } else {
            None
        };
        let next = if t < cfg.iterations {
            Some(messi_step(&theta, ts, &fc, cfg)?)
        } else {
            None
        };
        history.push(IterationRecord {
            iteration: t,
            theta: theta.as_slice().to_vec(),
            mismatch: l2_distance(ts.expert_mean_fc(), &fc),
            expected_fc: fc,
            penalty,
        });
        if let Some(next) = next {
            theta = next;
        }
    }
    Ok(LearnerRun { theta, history })
}

/// Plain MaxEnt-IRL: [`run_messi`] without unsupervised data and with `λ₀ = 0`.
pub fn run_maxent(
    mdp: &MdpModel,
    expert: &[Trajectory],
    cfg: &LearnerConfig,
) -> Result<LearnerRun> {
    // with λ₀ = 0 the similarity values never enter the update
    let n = expert.len();
    let ts = TrainingSet::with_matrix(expert.to_vec(), Vec::new(), vec![0.0; n * n])?;
    let cfg = LearnerConfig {
        lambda0: 0.0,
        ..cfg.clone()
    };
    run_messi(mdp, &ts, &cfg)
}

/// Writes `iteration, theta_0..theta_{d-1}, mismatch, penalty` rows.
pub fn write_history_csv<W: Write>(history: &[IterationRecord], mut out: W) -> io::Result<()> {
    let d = history.first().map_or(0, |r| r.theta.len());
    write!(out, "iteration")?;
    for i in 0..d {
        write!(out, ",theta_{i}")?;
    }
    writeln!(out, ",mismatch,penalty")?;
    for r in history {
        write!(out, "{}", r.iteration)?;
        for v in &r.theta {
            write!(out, ",{v}")?;
        }
        write!(out, ",{}", r.mismatch)?;
        match r.penalty {
            Some(p) => writeln!(out, ",{p}")?,
            None => writeln!(out, ",")?,
        }
    }
    Ok(())
}
