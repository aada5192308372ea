//! Maximum-entropy dynamic programming.
//!
//! The backward pass turns a reward vector into the soft policy of the
//! maximum-entropy trajectory distribution
//! `P(ζ|θ) ∝ d₀(s₀) · exp(θᵀf_ζ) · ∏ p(s_{t+1}|s_t, a_t)`, and the forward
//! pass propagates the initial distribution under that policy to obtain
//! discounted state visitation frequencies `ρ`. The expected feature count is
//! then `Σ_s ρ(s) f(s)`.
//!
//! Two backward passes are provided:
//!
//! * [`finite_horizon_backward_pass`] computes the time-indexed policy of the
//!   distribution over trajectories with `horizon` states. It is exact: the
//!   path distribution it induces equals the enumerated MaxEnt distribution,
//!   and it is what the learners use.
//! * [`backward_pass`] is stationary discounted soft value iteration,
//!   `Q(s,a) = θᵀf(s) + γ Σ p(s'|s,a) V(s')`, `V(s) = log Σ_a exp Q(s,a)`,
//!   iterated to a tolerance. Discounting inside the exponent makes the exact
//!   policy time-dependent, so this one is an approximation of the former.
//!
//! Both work in log space and stay finite for `‖θ‖_∞` in the hundreds.
//!
//! Terminal states are absorbing. Their value is the discounted sum of their
//! own (normally zero) reward and they are excluded from policy normalization.

use crate::error::{check_dim, invalid_param, Error, Result};
use crate::math::{dot, log_sum_exp};
use crate::mdp::{MdpModel, RewardVector, Trajectory};
use crate::policy::Policy;

/// Default cap on the number of paths [`enumerate_trajectories`] will produce.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Default tolerance on the max-norm change of `V` for [`backward_pass`].
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default sweep limit for [`backward_pass`].
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

/// Remaining discounted mass below which an unbounded forward pass stops.
const FORWARD_MASS_TOL: f64 = 1e-13;

/// Soft policy `π(a|s)` together with the log-partition data of the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPolicy {
    n_states: usize,
    n_actions: usize,
    /// One `s * n_actions + a` table per decision step; a single table for
    /// stationary policies.
    tables: Vec<Vec<f64>>,
    soft_values: Vec<f64>,
    log_partition: f64,
    theta: Vec<f64>,
    converged: bool,
    sweeps: usize,
}

impl SoftPolicy {
    /// `V(s)` at the first decision step, i.e. `log Z(θ | s₀ = s)`.
    pub fn soft_values(&self) -> &[f64] {
        &self.soft_values
    }

    /// `log Σ_s d₀(s) exp V(s)`: the log normalizer of the trajectory distribution.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// False when the stationary sweep stopped at its sweep limit.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Number of decision steps with their own table (1 when stationary).
    pub fn n_steps(&self) -> usize {
        self.tables.len()
    }

    pub fn is_stationary(&self) -> bool {
        self.tables.len() == 1
    }
}

impl Policy for SoftPolicy {
    fn n_states(&self) -> usize {
        self.n_states
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn action_probs(&self, step: usize, state: usize) -> &[f64] {
        let table = &self.tables[step.min(self.tables.len() - 1)];
        &table[state * self.n_actions..(state + 1) * self.n_actions]
    }
}

fn log_partition(mdp: &MdpModel, values: &[f64]) -> f64 {
    let terms: Vec<f64> = mdp
        .initial_dist()
        .iter()
        .zip(values)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &v)| p.ln() + v)
        .collect();
    log_sum_exp(&terms)
}

/// Stationary discounted soft value iteration.
///
/// Sweeps until the max-norm change of `V` drops below `tol` or `max_sweeps`
/// is reached; in the latter case the returned policy is flagged as not
/// converged rather than treated as a failure.
pub fn backward_pass(
    mdp: &MdpModel,
    theta: &RewardVector,
    tol: f64,
    max_sweeps: usize,
) -> Result<SoftPolicy> {
    if !(tol > 0.0) {
        return Err(invalid_param("tol", "must be positive"));
    }
    let rewards = mdp.state_rewards(theta.as_slice())?;
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.discount();

    let terminal_value = |s: usize| rewards[s] / (1.0 - gamma);
    let mut values: Vec<f64> = (0..n)
        .map(|s| if mdp.is_terminal(s) { terminal_value(s) } else { 0.0 })
        .collect();
    let mut q = vec![0.0; n * m];
    let mut next = values.clone();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for s in 0..n {
            if mdp.is_terminal(s) {
                continue;
            }
            let qs = &mut q[s * m..(s + 1) * m];
            for (a, qa) in qs.iter_mut().enumerate() {
                let cont: f64 = mdp
                    .successors(s, a)
                    .iter()
                    .map(|&(sp, p)| p * values[sp])
                    .sum();
                *qa = rewards[s] + gamma * cont;
            }
            next[s] = log_sum_exp(qs);
            delta = delta.max((next[s] - values[s]).abs());
        }
        std::mem::swap(&mut values, &mut next);
        if delta < tol {
            converged = true;
            break;
        }
    }

    // policy from the final values
    let mut table = vec![1.0 / m as f64; n * m];
    for s in 0..n {
        if mdp.is_terminal(s) {
            continue;
        }
        let qs = &mut q[s * m..(s + 1) * m];
        for (a, qa) in qs.iter_mut().enumerate() {
            let cont: f64 = mdp
                .successors(s, a)
                .iter()
                .map(|&(sp, p)| p * values[sp])
                .sum();
            *qa = rewards[s] + gamma * cont;
        }
        let v = log_sum_exp(qs);
        for a in 0..m {
            table[s * m + a] = (qs[a] - v).exp();
        }
    }

    Ok(SoftPolicy {
        n_states: n,
        n_actions: m,
        tables: vec![table],
        log_partition: log_partition(mdp, &values),
        soft_values: values,
        theta: theta.as_slice().to_vec(),
        converged,
        sweeps,
    })
}

/// Exact backward pass for trajectories of `horizon` states (`horizon - 1`
/// decisions).
///
/// With `Z_t(s)` the total weight of all continuations from `s` at time `t`,
/// `Z_t(s) = exp(γ^t θᵀf(s)) Σ_a Σ_{s'} p(s'|s,a) Z_{t+1}(s')` and
/// `π_t(a|s) ∝ Σ_{s'} p(s'|s,a) Z_{t+1}(s')`. Everything is carried as
/// logarithms.
pub fn finite_horizon_backward_pass(
    mdp: &MdpModel,
    theta: &RewardVector,
    horizon: usize,
) -> Result<SoftPolicy> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon);
    }
    let rewards = mdp.state_rewards(theta.as_slice())?;
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.discount();

    let log_probs: Vec<Vec<(usize, f64)>> = (0..n * m)
        .map(|sa| {
            mdp.successors(sa / m, sa % m)
                .iter()
                .map(|&(sp, p)| (sp, p.ln()))
                .collect()
        })
        .collect();

    let last = horizon - 1;
    let mut weight = gamma.powi(last as i32);
    let mut values: Vec<f64> = rewards.iter().map(|r| weight * r).collect();
    let mut tables = vec![vec![1.0 / m as f64; n * m]; last.max(1)];
    let mut q = vec![0.0; m];
    let mut scratch = Vec::new();

    for t in (0..last).rev() {
        weight = gamma.powi(t as i32);
        let mut next = vec![0.0; n];
        let table = &mut tables[t];
        for s in 0..n {
            if mdp.is_terminal(s) {
                next[s] = weight * rewards[s] + values[s];
                continue;
            }
            for (a, qa) in q.iter_mut().enumerate() {
                scratch.clear();
                scratch.extend(log_probs[s * m + a].iter().map(|&(sp, lp)| lp + values[sp]));
                *qa = weight * rewards[s] + log_sum_exp(&scratch);
            }
            let v = log_sum_exp(&q);
            next[s] = v;
            for a in 0..m {
                table[s * m + a] = (q[a] - v).exp();
            }
        }
        values = next;
    }

    Ok(SoftPolicy {
        n_states: n,
        n_actions: m,
        tables,
        log_partition: log_partition(mdp, &values),
        soft_values: values,
        theta: theta.as_slice().to_vec(),
        converged: true,
        sweeps: last,
    })
}

/// How far a forward pass was run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    /// Sum over the first `n` states (`t = 0..n-1`).
    Finite(usize),
    /// Run until the remaining discounted mass is negligible.
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisitationFrequencies {
    /// Expected discounted visitation `ρ(s) = Σ_t γ^t P(s_t = s)`.
    pub rho: Vec<f64>,
    /// Number of time steps summed.
    pub steps: usize,
    pub horizon: Horizon,
}

/// Propagates `d_{t+1}(s') = Σ_{s,a} d_t(s) π_t(a|s) p(s'|s,a)` from
/// `d₀ = initial_dist` and accumulates `ρ = Σ_t γ^t d_t`. Mass entering a
/// terminal state stays there.
pub fn forward_pass<P: Policy + ?Sized>(
    mdp: &MdpModel,
    policy: &P,
    horizon: Horizon,
) -> Result<VisitationFrequencies> {
    check_dim(mdp.n_states(), policy.n_states())?;
    check_dim(mdp.n_actions(), policy.n_actions())?;
    let gamma = mdp.discount();
    let max_steps = match horizon {
        Horizon::Finite(0) => return Err(Error::InvalidHorizon),
        Horizon::Finite(h) => h,
        Horizon::Converged => usize::MAX,
    };
    let n = mdp.n_states();
    let mut d = mdp.initial_dist().to_vec();
    let mut rho = vec![0.0; n];
    let mut weight = 1.0;
    let mut steps = 0;
    loop {
        for (r, x) in rho.iter_mut().zip(&d) {
            *r += weight * x;
        }
        steps += 1;
        weight *= gamma;
        if steps >= max_steps {
            break;
        }
        if horizon == Horizon::Converged && weight / (1.0 - gamma) < FORWARD_MASS_TOL {
            break;
        }
        let mut next = vec![0.0; n];
        for s in 0..n {
            let mass = d[s];
            if mass == 0.0 {
                continue;
            }
            if mdp.is_terminal(s) {
                next[s] += mass;
                continue;
            }
            for (a, &pa) in policy.action_probs(steps - 1, s).iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                for &(sp, p) in mdp.successors(s, a) {
                    next[sp] += mass * pa * p;
                }
            }
        }
        d = next;
    }
    Ok(VisitationFrequencies {
        rho,
        steps,
        horizon,
    })
}

/// `Σ_s ρ(s) f(s)`.
pub fn expected_feature_count(mdp: &MdpModel, rho: &VisitationFrequencies) -> Result<Vec<f64>> {
    check_dim(mdp.n_states(), rho.rho.len())?;
    let mut out = vec![0.0; mdp.n_features()];
    for (s, &w) in rho.rho.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, f) in out.iter_mut().zip(mdp.features(s)) {
            *o += w * f;
        }
    }
    Ok(out)
}

/// Runs the exact backward pass and the matching forward pass, returning the
/// soft policy and its expected discounted feature count over `horizon` states.
pub fn soft_feature_expectation(
    mdp: &MdpModel,
    theta: &RewardVector,
    horizon: usize,
) -> Result<(SoftPolicy, Vec<f64>)> {
    let policy = finite_horizon_backward_pass(mdp, theta, horizon)?;
    let rho = forward_pass(mdp, &policy, Horizon::Finite(horizon))?;
    let f = expected_feature_count(mdp, &rho)?;
    Ok((policy, f))
}

/// `log P(ζ|θ) = θᵀf_ζ − log Z(θ) + log d₀(s₀) + Σ_t log p(s_{t+1}|s_t, a_t)`.
///
/// Returns `-inf` when some step (or the start state) has zero probability.
pub fn trajectory_log_prob(
    mdp: &MdpModel,
    theta: &RewardVector,
    trajectory: &Trajectory,
    log_partition: f64,
) -> Result<f64> {
    let actions = trajectory.actions().ok_or(Error::MissingActions)?;
    check_dim(mdp.n_features(), theta.dim())?;
    let states = trajectory.states();
    let init = mdp.initial_dist()[states[0]];
    if init == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut log_dyn = init.ln();
    for (t, &a) in actions.iter().enumerate() {
        let p = mdp.transition_prob(states[t], a, states[t + 1]);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_dyn += p.ln();
    }
    Ok(dot(theta.as_slice(), trajectory.feature_count()) - log_partition + log_dyn)
}

/// Enumerates every feasible path with `horizon` transitions (so `horizon + 1`
/// states) from every start state with positive initial mass. A path that
/// enters a terminal state stops there. Each path comes with its dynamics
/// probability `d₀(s₀) ∏ p(s_{t+1}|s_t, a_t)`.
///
/// Refuses when `n_actions^horizon` or the number of generated paths exceeds `cap`.
pub fn enumerate_trajectories(
    mdp: &MdpModel,
    horizon: usize,
    cap: u128,
) -> Result<Vec<(Trajectory, f64)>> {
    let action_paths = (mdp.n_actions() as u128)
        .checked_pow(horizon as u32)
        .unwrap_or(u128::MAX);
    if action_paths > cap {
        return Err(Error::EnumerationTooLarge {
            paths: action_paths,
            cap,
        });
    }

    struct Partial {
        states: Vec<usize>,
        actions: Vec<usize>,
        prob: f64,
    }

    let mut frontier: Vec<Partial> = mdp
        .initial_dist()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| Partial {
            states: vec![s],
            actions: vec![],
            prob: p,
        })
        .collect();
    let mut finished = Vec::new();

    for _ in 0..horizon {
        let mut next = Vec::new();
        for partial in frontier {
            let s = *partial.states.last().unwrap();
            if mdp.is_terminal(s) {
                finished.push(partial);
                continue;
            }
            for a in 0..mdp.n_actions() {
                for &(sp, p) in mdp.successors(s, a) {
                    let mut states = partial.states.clone();
                    states.push(sp);
                    let mut actions = partial.actions.clone();
                    actions.push(a);
                    next.push(Partial {
                        states,
                        actions,
                        prob: partial.prob * p,
                    });
                }
            }
        }
        let total = (next.len() + finished.len()) as u128;
        if total > cap {
            return Err(Error::EnumerationTooLarge { paths: total, cap });
        }
        frontier = next;
    }
    finished.extend(frontier);

    finished
        .into_iter()
        .map(|p| Ok((Trajectory::new(mdp, p.states, Some(p.actions))?, p.prob)))
        .collect()
}
