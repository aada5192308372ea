use irl_core::env::{
    build_gridworld, build_highway, build_pit, evaluate_policy, pit_feature, pit_policies, traffic_pattern,
    Behavior, EnvironmentBundle, GridworldParams, HighwayParams, PitParams,
};
use irl_core::irl::turn_count;
use irl_core::mdp::sample_trajectory;
use irl_core::soft_dp::{enumerate_trajectories, soft_feature_expectation};
use irl_core::{MdpModel, Policy, RewardVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PIT: usize = 2;

fn assert_stochastic(mdp: &MdpModel) {
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            let total: f64 = mdp.transition_row(s, a).iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "row ({s}, {a}) sums to {total}");
        }
    }
    let start: f64 = mdp.initial_dist().iter().sum();
    assert!((start - 1.0).abs() < 1e-12);
    assert!(mdp.is_normalized());
    let bound = 1.0 - mdp.discount();
    for s in 0..mdp.n_states() {
        assert!(mdp.features(s).iter().all(|&f| (0.0..=bound + 1e-12).contains(&f)));
    }
}

fn assert_bundle_shapes(b: &EnvironmentBundle) {
    let d = b.n_features();
    for theta in [&b.theta_star, &b.theta_1, &b.theta_2, &b.metric.weights] {
        assert_eq!(theta.len(), d);
    }
}

#[test]
fn gridworld_layout_and_rewards() {
    let b = build_gridworld(&GridworldParams::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(b.mdp.n_states(), 64);
    assert_eq!(b.mdp.n_actions(), 4);
    assert_eq!(b.n_features(), 16);
    assert_stochastic(&b.mdp);
    assert_bundle_shapes(&b);
    for s in 0..64 {
        assert_eq!(b.mdp.features(s).iter().filter(|&&f| f > 0.0).count(), 1);
    }
    for theta in [&b.theta_star, &b.theta_1, &b.theta_2] {
        assert_eq!(theta.iter().filter(|&&v| v > 0.0).count(), 3);
    }
    assert!(b.metric.weights.iter().all(|w| (-1.0..=1.0).contains(w)));
}

#[test]
fn gridworld_is_reproducible_per_seed() {
    let build = |seed| build_gridworld(&GridworldParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(build(4), build(4));
    assert_ne!(build(4).theta_star, build(5).theta_star);
}

#[test]
fn gridworld_rejects_bad_tiling() {
    let params = GridworldParams {
        side: 7,
        ..GridworldParams::default()
    };
    assert!(build_gridworld(&params, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    let params = GridworldParams {
        start: Some((8, 0)),
        ..GridworldParams::default()
    };
    assert!(build_gridworld(&params, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
}

#[test]
fn highway_rebuild_is_bit_exact() {
    let params = HighwayParams::default();
    let a = build_highway(&params).unwrap();
    let b = build_highway(&params).unwrap();
    assert_eq!(a.mdp.to_json(), b.mdp.to_json());
    assert_eq!(a, b);
    assert_stochastic(&a.mdp);
    assert_bundle_shapes(&a);
    let other = build_highway(&HighwayParams {
        traffic_seed: 9,
        ..params
    })
    .unwrap();
    assert_ne!(a.mdp.to_json(), other.mdp.to_json());
}

#[test]
fn highway_traffic_always_leaves_a_lane() {
    for seed in 0..20 {
        let params = HighwayParams {
            traffic_seed: seed,
            density: 0.9,
            ..HighwayParams::default()
        };
        let rows = traffic_pattern(&params);
        assert_eq!(rows.len(), params.period);
        assert!(rows[0].iter().all(|&c| !c));
        assert!(rows.iter().all(|r| r.iter().any(|&c| !c)));
    }
    assert!(build_highway(&HighwayParams {
        n_lanes: 1,
        ..HighwayParams::default()
    })
    .is_err());
}

#[test]
fn careful_driver_beats_reckless_one() {
    let b = build_highway(&HighwayParams::default()).unwrap();
    let bound = 50.0;
    let careful = evaluate_policy(&b, &RewardVector::new(b.theta_star.clone(), bound).unwrap(), b.horizon).unwrap();
    let reckless = evaluate_policy(&b, &RewardVector::zeros(4, bound).unwrap(), b.horizon).unwrap();
    assert!(careful > reckless, "{careful} vs {reckless}");
}

fn deterministic_pit(side: usize) -> EnvironmentBundle {
    build_pit(&PitParams {
        side,
        success_prob: 1.0,
        horizon: 4 * side,
        ..PitParams::default()
    })
    .unwrap()
}

#[test]
fn pit_features_partition_the_grid() {
    let side = 6;
    let last = side - 1;
    let mut counts = [0; 3];
    for y in 0..side {
        for x in 0..side {
            match pit_feature(side, x, y) {
                Some(i) => counts[i] += 1,
                None => assert!(x == y && (x == 0 || x == last)),
            }
        }
    }
    assert_eq!(counts[PIT], (side - 2) * (side - 2));
    assert_eq!(counts[0], counts[1]);
}

#[test]
fn hand_policies_trace_the_expected_routes() {
    let side = 6;
    let b = deterministic_pit(side);
    assert_stochastic(&b.mdp);
    assert_bundle_shapes(&b);
    let (ccw, cw, cross) = pit_policies(side).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let goal = side * side - 1;
    for (policy, crosses) in [(&ccw, false), (&cw, false), (&cross, true)] {
        let t = sample_trajectory(&b.mdp, policy, b.horizon, &mut rng).unwrap();
        assert_eq!(*t.states().last().unwrap(), goal);
        let pit_visits = t.states().iter().filter(|&&s| pit_feature(side, s % side, s / side) == Some(PIT)).count();
        assert_eq!(pit_visits > 0, crosses, "{:?}", t.states());
    }
    let ccw_path = sample_trajectory(&b.mdp, &ccw, b.horizon, &mut rng).unwrap();
    let cw_path = sample_trajectory(&b.mdp, &cw, b.horizon, &mut rng).unwrap();
    // both go around with a single corner
    assert_eq!(turn_count(&ccw_path).unwrap(), 1);
    assert_eq!(turn_count(&cw_path).unwrap(), 1);
    assert!(turn_count(&sample_trajectory(&b.mdp, &cross, b.horizon, &mut rng).unwrap()).unwrap() > 1);
    assert!(matches!(b.expert, Behavior::Policy(ref p) if *p == ccw));
}

#[test]
fn pit_metric_matches_enumeration() {
    let b = build_pit(&PitParams {
        side: 3,
        horizon: 5,
        ..PitParams::default()
    })
    .unwrap();
    for theta in [vec![0.0, 0.0, 0.0], vec![1.0, -2.0, -4.0], vec![-3.0, 0.5, 2.0]] {
        let theta = RewardVector::new(theta, 5.0).unwrap();
        let (policy, _) = soft_feature_expectation(&b.mdp, &theta, b.horizon).unwrap();
        let mut brute = 0.0;
        let mut mass = 0.0;
        for (traj, _) in enumerate_trajectories(&b.mdp, b.horizon - 1, 1 << 20).unwrap() {
            let states = traj.states();
            let mut p = b.mdp.initial_dist()[states[0]];
            for (t, &a) in traj.actions().unwrap().iter().enumerate() {
                p *= policy.action_probs(t, states[t])[a] * b.mdp.transition_prob(states[t], a, states[t + 1]);
            }
            mass += p;
            brute += p * b.metric.evaluate(traj.feature_count()).unwrap();
        }
        assert!((mass - 1.0).abs() < 1e-9);
        let metric = evaluate_policy(&b, &theta, b.horizon).unwrap();
        assert!((metric - brute).abs() < 1e-9, "{metric} vs {brute}");
    }
}

#[test]
fn pit_rejects_small_grids() {
    assert!(build_pit(&PitParams {
        side: 2,
        ..PitParams::default()
    })
    .is_err());
}
