use irl_core::irl::{
    pairwise_penalty, penalty_gradient, project_inf_ball, rbf_similarity, unsquared_distance_similarity,
    TrainingSet,
};
use irl_core::mdp::sample_trajectory;
use irl_core::{normalize_features, MdpModel, RewardVector, TabularPolicy, Trajectory};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One state per trajectory, so each single-state trajectory's feature count is its row.
fn point_trajectories(rows: &[Vec<f64>]) -> (MdpModel, Vec<Trajectory>) {
    let n = rows.len();
    let mut transition = vec![0.0; n * n];
    for s in 0..n {
        transition[s * n + s] = 1.0;
    }
    let mdp = MdpModel::new(n, 1, transition, rows.to_vec(), vec![1.0 / n as f64; n], 0.9, &[]).unwrap();
    let trajs = (0..n).map(|s| Trajectory::new(&mdp, vec![s], None).unwrap()).collect();
    (mdp, trajs)
}

fn symmetric(n: usize, raw: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = raw[i.min(j) * n + i.max(j)];
        }
    }
    m
}

fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, usize)> {
    (1usize..=10, 1usize..=8, 1usize..=7).prop_flat_map(|(d, n, l)| {
        let l = l.min(n);
        (
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), n),
            prop::collection::vec(0.0..=1.0f64, n * n),
            prop::collection::vec(-10.0..10.0f64, d),
            Just(l),
        )
    })
}

fn build_set(rows: &[Vec<f64>], raw: &[f64], l: usize) -> TrainingSet {
    let (_, trajs) = point_trajectories(rows);
    let n = rows.len();
    let mut trajs = trajs;
    let unsupervised = trajs.split_off(l);
    TrainingSet::with_matrix(trajs, unsupervised, symmetric(n, raw)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences((rows, raw, theta, l) in instance()) {
        let ts = build_set(&rows, &raw, l);
        let th = RewardVector::new(theta.clone(), 100.0).unwrap();
        let grad = penalty_gradient(&th, &ts).unwrap();
        let h = 1e-4;
        for i in 0..theta.len() {
            let shifted = |delta: f64| {
                let mut t = theta.clone();
                t[i] += delta;
                pairwise_penalty(&RewardVector::new(t, 100.0).unwrap(), &ts).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let scale = fd.abs().max(grad[i].abs()).max(1e-3);
            prop_assert!((grad[i] - fd).abs() / scale <= 1e-5, "component {}: {} vs {}", i, grad[i], fd);
        }
    }

    #[test]
    fn penalty_is_linear_in_similarity((rows, raw, theta, l) in instance(), c in 0.0..=1.0f64) {
        let th = RewardVector::new(theta, 100.0).unwrap();
        let scaled: Vec<f64> = raw.iter().map(|s| s * c).collect();
        let base = pairwise_penalty(&th, &build_set(&rows, &raw, l)).unwrap();
        let shrunk = pairwise_penalty(&th, &build_set(&rows, &scaled, l)).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((shrunk - c * base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn penalty_is_quadratic_in_theta((rows, raw, theta, l) in instance(), k in -3.0..3.0f64) {
        let ts = build_set(&rows, &raw, l);
        let base = pairwise_penalty(&RewardVector::new(theta.clone(), 100.0).unwrap(), &ts).unwrap();
        let scaled: Vec<f64> = theta.iter().map(|t| t * k).collect();
        let r = pairwise_penalty(&RewardVector::new(scaled, 100.0).unwrap(), &ts).unwrap();
        prop_assert!((r - k * k * base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn projection_keeps_signs_and_argmax(theta in prop::collection::vec(-1000.0..1000.0f64, 1..12), bound in 0.1..600.0f64) {
        let p = project_inf_ball(&theta, bound);
        let norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(p.iter().all(|v| v.abs() <= bound));
        for (a, b) in theta.iter().zip(&p) {
            prop_assert!(a.signum() == b.signum() || *a == 0.0);
        }
        if norm <= bound {
            prop_assert_eq!(&p, &theta);
        } else {
            let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |k, (i, x)| if x.abs() > v[k].abs() { i } else { k });
            prop_assert!((p[argmax(&theta)].abs() - bound).abs() <= 1e-9 * bound);
            prop_assert_eq!(argmax(&p), argmax(&theta));
        }
    }

    #[test]
    fn kernels_are_bounded_symmetric_and_reflexive(
        a in prop::collection::vec(-5.0..5.0f64, 4),
        b in prop::collection::vec(-5.0..5.0f64, 4),
        width in 0.01..20.0f64,
    ) {
        for k in [rbf_similarity, unsquared_distance_similarity] {
            let ab = k(&a, &b, width).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab, k(&b, &a, width).unwrap());
            prop_assert_eq!(k(&a, &a, width).unwrap(), 1.0);
        }
    }

    #[test]
    fn normalized_feature_counts_are_bounded(
        seed in any::<u64>(),
        n in 2usize..6,
        gamma in 0.3..0.99f64,
        horizon in 1usize..40,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut transition = vec![0.0; n * 2 * n];
        for sa in 0..2 * n {
            transition[sa * n + rng.random_range(0..n)] = 1.0;
        }
        let features = (0..n).map(|_| (0..3).map(|_| rng.random_range(-50.0..50.0)).collect()).collect();
        let raw = MdpModel::new(n, 2, transition, features, vec![1.0 / n as f64; n], gamma, &[]).unwrap();
        let mdp = normalize_features(&raw).unwrap();
        let policy = TabularPolicy::uniform(n, 2);
        let t = sample_trajectory(&mdp, &policy, horizon, &mut rng).unwrap();
        prop_assert!(t.feature_count().iter().all(|&f| (0.0..=1.0 + 1e-12).contains(&f)));
    }
}
