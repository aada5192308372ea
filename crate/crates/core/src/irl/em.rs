//! EM-style semi-supervised baseline: alternate trajectory weighting under the
//! current reward with a few weighted MaxEnt gradient steps.

use crate::error::{check_dim, invalid_param, Error, Result};
use crate::math::{l2_distance, log_sum_exp};
use crate::mdp::MdpModel;
use crate::soft_dp::trajectory_log_prob;

use super::learner::{ascend, initial_theta, policy_and_expected_fc, IterationRecord, LearnerConfig};
use super::penalty::TrainingSet;
use crate::mdp::RewardVector;

/// Outcome of one expectation step.
#[derive(Debug, Clone, PartialEq)]
pub struct EmRound {
    /// `w(ζ) ∝ P(ζ|θ)` over every trajectory of the set (experts first).
    pub weights: Vec<f64>,
    /// `Σ_ζ w(ζ) f_ζ`, the feature target of the following maximization steps.
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmRun {
    pub theta: RewardVector,
    /// `rounds · eta + 1` rows, laid out like [`super::LearnerRun::history`].
    pub history: Vec<IterationRecord>,
    pub rounds: Vec<EmRound>,
}

/// Normalized trajectory weights `P(ζ|θ) / Σ_ζ' P(ζ'|θ)` over the whole set.
pub fn trajectory_weights(
    mdp: &MdpModel,
    theta: &RewardVector,
    ts: &TrainingSet,
    log_partition: f64,
) -> Result<Vec<f64>> {
    let log_probs = ts
        .trajectories()
        .map(|t| trajectory_log_prob(mdp, theta, t, log_partition))
        .collect::<Result<Vec<_>>>()?;
    let norm = log_sum_exp(&log_probs);
    if norm == f64::NEG_INFINITY {
        return Err(Error::NoFeasibleTrajectory);
    }
    Ok(log_probs.iter().map(|lp| (lp - norm).exp()).collect())
}

/// η-EM-MaxEnt: `rounds` expectation steps, each followed by `eta` projected
/// gradient steps towards the weighted feature target. `cfg.iterations` is
/// not used; the run takes `rounds · eta` steps.
pub fn em_maxent(
    mdp: &MdpModel,
    ts: &TrainingSet,
    cfg: &LearnerConfig,
    eta: usize,
    rounds: usize,
) -> Result<EmRun> {
    if eta < 1 {
        return Err(invalid_param("eta", "must be at least 1"));
    }
    if rounds < 1 {
        return Err(invalid_param("rounds", "must be at least 1"));
    }
    LearnerConfig {
        iterations: rounds * eta,
        ..cfg.clone()
    }
    .validate()?;
    check_dim(mdp.n_features(), ts.n_features())?;

    let mut theta = initial_theta(mdp.n_features(), cfg)?;
    let mut history = Vec::with_capacity(rounds * eta + 1);
    let mut round_log = Vec::with_capacity(rounds);
    let mut iteration = 0;

    for _ in 0..rounds {
        let (policy, mut fc) = policy_and_expected_fc(mdp, &theta, cfg)?;
        let weights = trajectory_weights(mdp, &theta, ts, policy.log_partition())?;
        let mut target = vec![0.0; ts.n_features()];
        for (w, traj) in weights.iter().zip(ts.trajectories()) {
            for (t, f) in target.iter_mut().zip(traj.feature_count()) {
                *t += w * f;
            }
        }
        for step in 0..eta {
            if step > 0 {
                fc = policy_and_expected_fc(mdp, &theta, cfg)?.1;
            }
            let direction: Vec<f64> = target.iter().zip(&fc).map(|(a, b)| a - b).collect();
            let next = ascend(&theta, &direction, cfg)?;
            history.push(IterationRecord {
                iteration,
                theta: theta.as_slice().to_vec(),
                mismatch: l2_distance(ts.expert_mean_fc(), &fc),
                expected_fc: fc.clone(),
                penalty: None,
            });
            theta = next;
            iteration += 1;
        }
        round_log.push(EmRound { weights, target });
    }

    let (_, fc) = policy_and_expected_fc(mdp, &theta, cfg)?;
    history.push(IterationRecord {
        iteration,
        theta: theta.as_slice().to_vec(),
        mismatch: l2_distance(ts.expert_mean_fc(), &fc),
        expected_fc: fc,
        penalty: None,
    });

    Ok(EmRun {
        theta,
        history,
        rounds: round_log,
    })
}
