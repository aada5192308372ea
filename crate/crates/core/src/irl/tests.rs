use super::*;
use crate::error::Error;
use crate::mdp::{normalize_features, MdpModel, RewardVector, Trajectory};

fn trajectory_with_fc(fc: Vec<f64>) -> Trajectory {
    // one-state model whose single feature row reproduces `fc` for a length-1 path
    let mdp = MdpModel::new(1, 1, vec![1.0], vec![fc], vec![1.0], 0.5, &[]).unwrap();
    Trajectory::new(&mdp, vec![0], Some(vec![])).unwrap()
}

fn two_trajectory_set() -> TrainingSet {
    let a = trajectory_with_fc(vec![1.0, 0.0]);
    let b = trajectory_with_fc(vec![0.0, 0.0]);
    TrainingSet::with_matrix(vec![a], vec![b], vec![1.0; 4]).unwrap()
}

#[test]
fn penalty_two_trajectory_example() {
    let ts = two_trajectory_set();
    let theta = RewardVector::new(vec![2.0, 0.0], 500.0).unwrap();
    assert!((pairwise_penalty(&theta, &ts).unwrap() - 2.0).abs() < 1e-15);
    // R(θ) = θ₁²/2 here, so the gradient is [θ₁, 0]
    let g = penalty_gradient(&theta, &ts).unwrap();
    assert!((g[0] - 2.0).abs() < 1e-15);
    assert_eq!(g[1], 0.0);
}

#[test]
fn penalty_vanishes_at_origin_and_for_equal_counts() {
    let ts = two_trajectory_set();
    let zero = RewardVector::zeros(2, 500.0).unwrap();
    assert_eq!(pairwise_penalty(&zero, &ts).unwrap(), 0.0);
    assert_eq!(penalty_gradient(&zero, &ts).unwrap(), vec![0.0, 0.0]);

    let same = TrainingSet::with_matrix(
        vec![trajectory_with_fc(vec![0.3, 0.1])],
        vec![trajectory_with_fc(vec![0.3, 0.1]); 2],
        vec![0.7; 9],
    )
    .unwrap();
    let theta = RewardVector::new(vec![123.0, -45.0], 500.0).unwrap();
    assert_eq!(pairwise_penalty(&theta, &same).unwrap(), 0.0);
    assert_eq!(penalty_gradient(&theta, &same).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn training_set_validation() {
    assert!(matches!(
        TrainingSet::with_matrix(vec![], vec![], vec![]),
        Err(Error::EmptyTrainingSet)
    ));
    let a = trajectory_with_fc(vec![1.0]);
    let b = trajectory_with_fc(vec![0.0]);
    assert!(matches!(
        TrainingSet::with_matrix(vec![a.clone()], vec![b.clone()], vec![1.0, 0.2, 0.3, 1.0]),
        Err(Error::InvalidSimilarity(_))
    ));
    assert!(matches!(
        TrainingSet::with_matrix(vec![a.clone()], vec![b.clone()], vec![1.0, 1.5, 1.5, 1.0]),
        Err(Error::InvalidSimilarity(_))
    ));
    let ts = TrainingSet::new(vec![a.clone(), b.clone()], vec![], &Similarity::Rbf { sigma: 5.0 })
        .unwrap();
    assert_eq!(ts.expert_mean_fc(), &[0.5]);
    assert_eq!(ts.similarity(0, 0), 1.0);
    assert_eq!(ts.similarity(0, 1), ts.similarity(1, 0));
    let wrong_dim = RewardVector::zeros(3, 1.0).unwrap();
    assert!(pairwise_penalty(&wrong_dim, &ts).is_err());
}

#[test]
fn projection_examples() {
    assert_eq!(project_inf_ball(&[100.0, -50.0], 500.0), vec![100.0, -50.0]);
    assert_eq!(project_inf_ball(&[1000.0, -200.0], 500.0), vec![500.0, -100.0]);
    assert_eq!(project_inf_ball(&[0.0, 0.0], 500.0), vec![0.0, 0.0]);
}

fn step_config(lambda0: f64) -> LearnerConfig {
    LearnerConfig {
        lambda0,
        ..LearnerConfig::default()
    }
}

#[test]
fn messi_step_fixed_point_and_single_step() {
    let ts = two_trajectory_set();
    let f_star = ts.expert_mean_fc().to_vec();
    let theta = RewardVector::new(vec![3.0, -1.0], 500.0).unwrap();
    let same = messi_step(&theta, &ts, &f_star, &step_config(0.0)).unwrap();
    assert_eq!(same, theta);

    let zero = RewardVector::zeros(2, 500.0).unwrap();
    let f_t = [0.25, 0.5];
    let next = messi_step(&zero, &ts, &f_t, &step_config(0.0)).unwrap();
    assert_eq!(next.as_slice(), &[0.75, -0.5]);
}

#[test]
fn messi_step_composes_penalty() {
    let ts = two_trajectory_set();
    let theta = RewardVector::new(vec![2.0, 0.0], 500.0).unwrap();
    let f_t = [0.4, 0.2];
    let next = messi_step(&theta, &ts, &f_t, &step_config(0.05)).unwrap();
    // (f* - f_t) = [0.6, -0.2]; (λ₀/θ_max)·∇R = 1e-4·[2, 0]
    let expected = project_inf_ball(&[2.0 + 0.6 - 1e-4 * 2.0, -0.2], 500.0);
    assert!((next.as_slice()[0] - expected[0]).abs() < 1e-15);
    assert!((next.as_slice()[1] - expected[1]).abs() < 1e-15);
}

#[test]
fn messi_step_projects() {
    let ts = two_trajectory_set();
    let theta = RewardVector::new(vec![499.9, -10.0], 500.0).unwrap();
    let cfg = LearnerConfig {
        step_size: 10.0,
        ..step_config(0.0)
    };
    let next = messi_step(&theta, &ts, &[0.0, 0.0], &cfg).unwrap();
    assert!(next.as_slice().iter().all(|v| v.abs() <= 500.0));
    assert_eq!(next.as_slice()[0], 500.0);
}

/// Line of four states, actions left/right. Feature 0 lives on the right end,
/// feature 1 on the left end. Starts in state 1.
fn line_mdp() -> MdpModel {
    let n = 4;
    let mut t = vec![0.0; n * 2 * n];
    for s in 0..n {
        let left = s.saturating_sub(1);
        let right = (s + 1).min(n - 1);
        t[(s * 2) * n + left] = 1.0;
        t[(s * 2 + 1) * n + right] = 1.0;
    }
    let features = vec![vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]];
    let raw = MdpModel::new(n, 2, t, features, vec![0.0, 1.0, 0.0, 0.0], 0.9, &[]).unwrap();
    normalize_features(&raw).unwrap()
}

fn right_runner(mdp: &MdpModel, horizon: usize) -> Trajectory {
    let mut states = vec![1];
    while states.len() < horizon {
        states.push((states.last().unwrap() + 1).min(3));
    }
    let actions = vec![1; horizon - 1];
    Trajectory::new(mdp, states, Some(actions)).unwrap()
}

fn line_config(lambda0: f64, iterations: usize) -> LearnerConfig {
    LearnerConfig {
        iterations,
        lambda0,
        horizon: 8,
        seed: 17,
        ..LearnerConfig::default()
    }
}

#[test]
fn maxent_learns_positive_weight_on_visited_feature() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let run = run_maxent(&mdp, &expert, &line_config(0.0, 100)).unwrap();
    assert!(run.theta.as_slice()[0] > 0.0);
    assert!(run.theta.as_slice()[1] < run.theta.as_slice()[0]);
    assert_eq!(run.history.len(), 101);
    let first = run.history[0].mismatch;
    let last = run.final_record().mismatch;
    assert!(last < first, "mismatch {first} -> {last}");
}

#[test]
fn one_maxent_step_matches_manual_composition() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let cfg = line_config(0.0, 1);
    let run = run_maxent(&mdp, &expert, &cfg).unwrap();
    let theta0 = initial_theta(2, &cfg).unwrap();
    let (_, f0) = policy_and_expected_fc(&mdp, &theta0, &cfg).unwrap();
    let manual: Vec<f64> = theta0
        .as_slice()
        .iter()
        .zip(expert[0].feature_count())
        .zip(&f0)
        .map(|((t, fs), ft)| t + (fs - ft))
        .collect();
    assert_eq!(run.theta.as_slice(), manual.as_slice());
}

#[test]
fn messi_without_penalty_equals_maxent() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let unsup = vec![right_runner(&mdp, 5), right_runner(&mdp, 3)];
    let ts = TrainingSet::new(expert.clone(), unsup, &Similarity::Rbf { sigma: 5.0 }).unwrap();
    let cfg = line_config(0.0, 20);
    let a = run_messi(&mdp, &ts, &cfg).unwrap();
    let b = run_maxent(&mdp, &expert, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn messi_is_deterministic_and_bounded() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let unsup = vec![right_runner(&mdp, 5), right_runner(&mdp, 3)];
    let ts = TrainingSet::new(expert, unsup, &Similarity::Rbf { sigma: 5.0 }).unwrap();
    let cfg = LearnerConfig {
        theta_max: 5.0,
        ..line_config(0.05, 40)
    };
    let a = run_messi(&mdp, &ts, &cfg).unwrap();
    let b = run_messi(&mdp, &ts, &cfg).unwrap();
    assert_eq!(a, b);
    for r in &a.history {
        assert!(r.theta.iter().all(|v| v.abs() <= 5.0));
        assert!(r.penalty.unwrap() >= 0.0);
    }
}

#[test]
fn discounted_planner_also_runs() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let cfg = LearnerConfig {
        planner: Planner::discounted(),
        ..line_config(0.0, 30)
    };
    let run = run_maxent(&mdp, &expert, &cfg).unwrap();
    assert!(run.theta.as_slice()[0] > 0.0);
}

#[test]
fn config_validation() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    for bad in [
        LearnerConfig { iterations: 0, ..line_config(0.0, 1) },
        LearnerConfig { theta_max: 0.0, ..line_config(0.0, 1) },
        LearnerConfig { lambda0: -1.0, ..line_config(0.0, 1) },
        LearnerConfig { horizon: 0, ..line_config(0.0, 1) },
    ] {
        let ts = TrainingSet::new(expert.clone(), vec![], &Similarity::TurnCount).unwrap();
        assert!(run_messi(&mdp, &ts, &bad).is_err());
    }
}

#[test]
fn em_weights_are_distributions() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let mut wander = vec![1usize];
    let mut actions = vec![];
    for t in 0..7 {
        let a = t % 2;
        actions.push(a);
        let s = *wander.last().unwrap();
        wander.push(if a == 0 { s.saturating_sub(1) } else { (s + 1).min(3) });
    }
    let other = Trajectory::new(&mdp, wander, Some(actions)).unwrap();
    let ts = TrainingSet::new(expert, vec![other], &Similarity::TurnCount).unwrap();
    let run = em_maxent(&mdp, &ts, &line_config(0.0, 1), 3, 5).unwrap();
    assert_eq!(run.rounds.len(), 5);
    assert_eq!(run.history.len(), 16);
    for round in &run.rounds {
        let total: f64 = round.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(round.weights.iter().all(|&w| w >= 0.0));
    }
}

#[test]
fn em_symmetric_pair_gets_equal_weights() {
    let mdp = line_mdp();
    // both stay in the middle for one step: same features, same dynamics
    let a = Trajectory::new(&mdp, vec![1, 2, 1], Some(vec![1, 0])).unwrap();
    let b = Trajectory::new(&mdp, vec![1, 2, 1], Some(vec![1, 0])).unwrap();
    let ts = TrainingSet::new(vec![a], vec![b], &Similarity::TurnCount).unwrap();
    let theta = RewardVector::new(vec![1.0, -1.0], 500.0).unwrap();
    let w = trajectory_weights(&mdp, &theta, &ts, 0.0).unwrap();
    assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
}

#[test]
fn em_with_expert_only_matches_maxent() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let ts = TrainingSet::new(expert.clone(), vec![], &Similarity::TurnCount).unwrap();
    let cfg = line_config(0.0, 12);
    let em = em_maxent(&mdp, &ts, &cfg, 4, 3).unwrap();
    let maxent = run_maxent(&mdp, &expert, &cfg).unwrap();
    assert_eq!(em.history, maxent.history);
    for round in &em.rounds {
        assert_eq!(round.weights, vec![1.0]);
        assert_eq!(round.target, ts.expert_mean_fc());
    }
}

#[test]
fn em_rejects_infeasible_set() {
    let mdp = line_mdp();
    // starts in state 0, which has no initial mass
    let bad = Trajectory::new(&mdp, vec![0, 1], Some(vec![1])).unwrap();
    let ts = TrainingSet::new(vec![bad], vec![], &Similarity::TurnCount).unwrap();
    assert!(matches!(
        em_maxent(&mdp, &ts, &line_config(0.0, 1), 1, 1),
        Err(Error::NoFeasibleTrajectory)
    ));
}

#[test]
fn history_csv_layout() {
    let mdp = line_mdp();
    let expert = vec![right_runner(&mdp, 8)];
    let run = run_maxent(&mdp, &expert, &line_config(0.0, 2)).unwrap();
    let mut buf = Vec::new();
    write_history_csv(&run.history, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,theta_0,theta_1,mismatch,penalty");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,"));
    assert!(lines[1].ends_with(','));
}
