//! Expert and unsupervised trajectory generation.
//!
//! Each generated trajectory consumes exactly two draws from the caller's
//! generator: a uniform number that picks the mixture component and a seed
//! for the trajectory's own generator. A single-component spec and a
//! two-component spec with `ν = 1` therefore produce identical sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Behavior, EnvironmentBundle};
use crate::error::{invalid_param, Result};
use crate::math::{inf_norm, sample_categorical};
use crate::mdp::{sample_trajectory, MdpModel, RewardVector, Trajectory};
use crate::policy::TabularPolicy;
use crate::soft_dp::{finite_horizon_backward_pass, SoftPolicy};

/// Per-trajectory mixture over behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    components: Vec<(Behavior, f64)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(Behavior, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid_param("components", "at least one component is required"));
        }
        if components.iter().any(|(_, w)| !(*w >= 0.0)) {
            return Err(invalid_param("components", "weights must be non-negative"));
        }
        let total: f64 = components.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid_param("components", format!("weights sum to {total}, not 1")));
        }
        Ok(MixtureSpec { components })
    }

    pub fn single(behavior: Behavior) -> Self {
        MixtureSpec {
            components: vec![(behavior, 1.0)],
        }
    }

    /// `ν · first + (1 - ν) · second`.
    pub fn two(nu: f64, first: Behavior, second: Behavior) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(invalid_param("nu", format!("{nu} is outside [0, 1]")));
        }
        Ok(MixtureSpec {
            components: vec![(first, nu), (second, 1.0 - nu)],
        })
    }

    pub fn components(&self) -> &[(Behavior, f64)] {
        &self.components
    }

    /// Weight of the first component of a two-component spec.
    pub fn nu(&self) -> Option<f64> {
        match self.components.as_slice() {
            [(_, nu), _] => Some(*nu),
            _ => None,
        }
    }

    /// Component picked by a uniform draw `u ∈ [0, 1)`.
    fn component(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, (_, w)) in self.components.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the accumulated total
        self.components
            .iter()
            .rposition(|(_, w)| *w > 0.0)
            .unwrap_or(0)
    }
}

/// The unsupervised distributions of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    /// `ν P_{u*} + (1 - ν) P₁`.
    Mu1,
    /// `ν P_{u*} + (1 - ν) P₂`.
    Mu2,
    /// `ν P₁ + (1 - ν) P₂`.
    Mu3,
    /// `P_{u*}` alone.
    Ustar,
}

impl MixtureKind {
    pub fn spec(self, bundle: &EnvironmentBundle, nu: f64) -> Result<MixtureSpec> {
        match self {
            MixtureKind::Mu1 => MixtureSpec::two(nu, bundle.star.clone(), bundle.alt_1.clone()),
            MixtureKind::Mu2 => MixtureSpec::two(nu, bundle.star.clone(), bundle.alt_2.clone()),
            MixtureKind::Mu3 => MixtureSpec::two(nu, bundle.alt_1.clone(), bundle.alt_2.clone()),
            MixtureKind::Ustar => Ok(MixtureSpec::single(bundle.star.clone())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MixtureKind::Mu1 => "mu1",
            MixtureKind::Mu2 => "mu2",
            MixtureKind::Mu3 => "mu3",
            MixtureKind::Ustar => "ustar",
        }
    }
}

/// A behavior with its soft policies precomputed.
enum Sampler {
    Soft(SoftPolicy),
    Tabular(TabularPolicy),
    Mixture(Vec<(Sampler, f64)>),
}

impl Sampler {
    fn compile(mdp: &MdpModel, behavior: &Behavior, horizon: usize) -> Result<Self> {
        Ok(match behavior {
            Behavior::Reward(theta) => {
                let bound = inf_norm(theta).max(1.0);
                let theta = RewardVector::new(theta.clone(), bound)?;
                Sampler::Soft(finite_horizon_backward_pass(mdp, &theta, horizon)?)
            }
            Behavior::Policy(p) => Sampler::Tabular(p.clone()),
            Behavior::Mixture(parts) => Sampler::Mixture(
                parts
                    .iter()
                    .map(|(b, w)| Ok((Sampler::compile(mdp, b, horizon)?, *w)))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn sample<R: Rng + ?Sized>(&self, mdp: &MdpModel, horizon: usize, rng: &mut R) -> Result<Trajectory> {
        match self {
            Sampler::Soft(p) => sample_trajectory(mdp, p, horizon, rng),
            Sampler::Tabular(p) => sample_trajectory(mdp, p, horizon, rng),
            Sampler::Mixture(parts) => {
                let weights: Vec<f64> = parts.iter().map(|(_, w)| *w).collect();
                let (inner, _) = &parts[sample_categorical(&weights, rng)];
                inner.sample(mdp, horizon, rng)
            }
        }
    }
}

/// `l` demonstrations from the bundle's expert behavior.
pub fn generate_expert<R: Rng + ?Sized>(
    bundle: &EnvironmentBundle,
    l: usize,
    rng: &mut R,
) -> Result<Vec<Trajectory>> {
    if l < 1 {
        return Err(invalid_param("l", "at least one expert trajectory is required"));
    }
    let spec = MixtureSpec::single(bundle.expert.clone());
    Ok(generate_labeled(bundle, &spec, l, rng)?
        .into_iter()
        .map(|(t, _)| t)
        .collect())
}

/// `u` trajectories from `spec`, one independent component draw each.
pub fn generate_unsupervised<R: Rng + ?Sized>(
    bundle: &EnvironmentBundle,
    spec: &MixtureSpec,
    u: usize,
    rng: &mut R,
) -> Result<Vec<Trajectory>> {
    Ok(generate_labeled(bundle, spec, u, rng)?
        .into_iter()
        .map(|(t, _)| t)
        .collect())
}

/// Like [`generate_unsupervised`], also returning each trajectory's component index.
pub fn generate_labeled<R: Rng + ?Sized>(
    bundle: &EnvironmentBundle,
    spec: &MixtureSpec,
    u: usize,
    rng: &mut R,
) -> Result<Vec<(Trajectory, usize)>> {
    if u == 0 {
        return Ok(Vec::new());
    }
    let samplers = spec
        .components
        .iter()
        .map(|(b, w)| {
            if *w > 0.0 {
                Sampler::compile(&bundle.mdp, b, bundle.horizon).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    (0..u)
        .map(|_| {
            let draw: f64 = rng.random();
            let seed: u64 = rng.random();
            let k = spec.component(draw);
            let sampler = samplers[k].as_ref().expect("picked components have positive weight");
            let mut own = ChaCha8Rng::seed_from_u64(seed);
            Ok((sampler.sample(&bundle.mdp, bundle.horizon, &mut own)?, k))
        })
        .collect()
}
