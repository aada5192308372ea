//! Tabular maximum-entropy inverse reinforcement learning.
//!
//! * [`mdp`]: models, trajectories, feature counts, sampling.
//! * [`soft_dp`]: backward/forward passes and the enumeration oracle.
//! * [`irl`]: MaxEnt-IRL, the pairwise-penalized MESSI learner, EM-MaxEnt.
//! * [`env`]: grid-world, highway and pit benchmark builders.
//! * [`datagen`]: expert and mixture trajectory generation.

pub mod datagen;
pub mod env;
pub mod error;
pub mod io;
pub mod irl;
pub mod math;
pub mod mdp;
pub mod policy;
pub mod seeds;
pub mod soft_dp;

pub use error::{Error, Result};
pub use mdp::{feature_count, normalize_features, trajectory_reward, MdpModel, RewardVector, Trajectory};
pub use policy::{Policy, TabularPolicy};
