//! Reward learners: MaxEnt-IRL, the pairwise-penalized semi-supervised
//! variant (MESSI), and the EM-MaxEnt baseline.

mod em;
mod learner;
mod penalty;
mod similarity;

pub use em::{em_maxent, trajectory_weights, EmRound, EmRun};
pub use learner::{
    initial_theta, messi_step, policy_and_expected_fc, project_inf_ball, run_maxent, run_messi,
    write_history_csv, IterationRecord, LearnerConfig, LearnerRun, Planner,
};
pub use penalty::{pairwise_penalty, penalty_gradient, TrainingSet};
pub use similarity::{
    rbf_similarity, turn_count, turn_count_similarity, unsquared_distance_similarity, Similarity,
};

#[cfg(test)]
mod tests;
