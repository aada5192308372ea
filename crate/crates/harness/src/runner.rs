//! Seeded experiment execution.
//!
//! For a seed `k` the environment, the expert set and every unsupervised set
//! are drawn from generators derived from `k` alone, so all algorithms and
//! all sweep points see the same data for the same seed. Seeds run in
//! parallel; results come back in a fixed order.

use irl_core::datagen::{generate_expert, generate_unsupervised, MixtureKind};
use irl_core::env::{build_gridworld, build_highway, build_pit, EnvironmentBundle};
use irl_core::irl::{
    em_maxent, run_maxent, run_messi, IterationRecord, LearnerConfig, TrainingSet,
};
use irl_core::math::inf_norm;
use irl_core::seeds::{derive_seed, stream_rng, Stream};
use irl_core::Trajectory;
use rayon::prelude::*;

use crate::config::{Algorithm, AlgorithmSpec, Axis, ConfigError, EnvironmentSpec, ExperimentConfig};
use crate::stats::{mean, paired_t_test, std_error, PairedTest};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {seed}, {algorithm}: {source}")]
    Learner {
        seed: u64,
        algorithm: String,
        source: irl_core::Error,
    },
}

/// Outcome of one algorithm on one seed at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub axis_value: Option<f64>,
    pub seed: u64,
    pub algorithm: String,
    /// Metric of `θ_t` for `t = 0..=T`.
    pub metrics: Vec<f64>,
    /// Largest `‖θ_t‖_∞` over the run.
    pub max_theta_norm: f64,
    pub final_theta: Vec<f64>,
}

impl RunRecord {
    pub fn final_metric(&self) -> f64 {
        *self.metrics.last().expect("at least one iteration")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub environment: String,
    pub axis: Option<Axis>,
    /// Algorithm labels in configuration order.
    pub labels: Vec<String>,
    pub axis_values: Vec<Option<f64>>,
    pub seeds: Vec<u64>,
    pub records: Vec<RunRecord>,
}

impl ExperimentResult {
    fn select<'a>(&'a self, label: &'a str, axis_value: Option<f64>) -> impl Iterator<Item = &'a RunRecord> {
        self.records
            .iter()
            .filter(move |r| r.algorithm == label && r.axis_value == axis_value)
    }

    /// Final-iteration metrics in seed order.
    pub fn final_metrics(&self, label: &str, axis_value: Option<f64>) -> Vec<f64> {
        self.select(label, axis_value).map(RunRecord::final_metric).collect()
    }

    /// Metrics at `iteration` in seed order.
    pub fn metrics_at(&self, label: &str, axis_value: Option<f64>, iteration: usize) -> Vec<f64> {
        self.select(label, axis_value)
            .map(|r| r.metrics[iteration.min(r.metrics.len() - 1)])
            .collect()
    }

    pub fn max_theta_norm(&self) -> f64 {
        self.records.iter().map(|r| r.max_theta_norm).fold(0.0, f64::max)
    }

    /// Per-point mean and standard error: every iteration for plain runs and
    /// the iterations axis, the final iteration otherwise.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut rows = Vec::new();
        for &axis_value in &self.axis_values {
            for label in &self.labels {
                let runs: Vec<&RunRecord> = self.select(label, axis_value).collect();
                let Some(first) = runs.first() else { continue };
                let last = first.metrics.len() - 1;
                let iterations: Vec<usize> = match self.axis {
                    None | Some(Axis::Iterations) => (0..=last).collect(),
                    Some(_) => vec![last],
                };
                for t in iterations {
                    let xs: Vec<f64> = runs.iter().map(|r| r.metrics[t]).collect();
                    rows.push(AggregateRow {
                        axis_value: axis_value.or(match self.axis {
                            Some(Axis::Iterations) => Some(t as f64),
                            _ => None,
                        }),
                        algorithm: label.clone(),
                        iteration: t,
                        mean: mean(&xs),
                        stderr: std_error(&xs),
                        n: xs.len(),
                    });
                }
            }
        }
        rows
    }

    /// Paired one-sided tests of every algorithm against `baseline` at the
    /// final iteration of each sweep point.
    pub fn compare_to(&self, baseline: &str) -> Vec<ComparisonRow> {
        if !self.labels.iter().any(|l| l == baseline) {
            return Vec::new();
        }
        let mut rows = Vec::new();
        for &axis_value in &self.axis_values {
            let base = self.final_metrics(baseline, axis_value);
            for label in self.labels.iter().filter(|l| *l != baseline) {
                let other = self.final_metrics(label, axis_value);
                rows.push(ComparisonRow {
                    axis_value,
                    algorithm: label.clone(),
                    baseline: baseline.to_string(),
                    test: paired_t_test(&other, &base),
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub axis_value: Option<f64>,
    pub algorithm: String,
    pub iteration: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub axis_value: Option<f64>,
    pub algorithm: String,
    pub baseline: String,
    /// `algorithm - baseline`.
    pub test: PairedTest,
}

/// Builds the environment for `seed`.
pub fn build_environment(spec: &EnvironmentSpec, seed: u64) -> irl_core::Result<EnvironmentBundle> {
    match spec {
        EnvironmentSpec::Gridworld(p) => build_gridworld(p, &mut stream_rng(seed, Stream::Environment)),
        EnvironmentSpec::Highway(p) => build_highway(p),
        EnvironmentSpec::Pit(p) => build_pit(p),
    }
}

/// Unsupervised set of `mixture` for `seed`.
pub fn unsupervised_set(
    cfg: &ExperimentConfig,
    bundle: &EnvironmentBundle,
    mixture: MixtureKind,
    seed: u64,
) -> irl_core::Result<Vec<Trajectory>> {
    let spec = mixture.spec(bundle, cfg.nu)?;
    generate_unsupervised(bundle, &spec, cfg.u, &mut stream_rng(seed, Stream::Unsupervised))
}

pub fn learner_config(cfg: &ExperimentConfig, bundle: &EnvironmentBundle, seed: u64) -> LearnerConfig {
    LearnerConfig {
        iterations: cfg.iterations,
        theta_max: cfg.theta_max,
        lambda0: cfg.lambda0,
        step_size: cfg.step_size,
        seed: derive_seed(seed, Stream::InitialTheta),
        horizon: bundle.horizon,
        planner: cfg.planner,
    }
}

/// Learner history of one algorithm on one seed.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    bundle: &EnvironmentBundle,
    expert: &[Trajectory],
    spec: &AlgorithmSpec,
    seed: u64,
) -> irl_core::Result<Vec<IterationRecord>> {
    let lcfg = learner_config(cfg, bundle, seed);
    let similarity = cfg.similarity.unwrap_or(bundle.default_similarity);
    let training_set = |mixture: MixtureKind| -> irl_core::Result<TrainingSet> {
        let unsup = unsupervised_set(cfg, bundle, mixture, seed)?;
        TrainingSet::new(expert.to_vec(), unsup, &similarity)
    };
    Ok(match spec.algorithm {
        Algorithm::MaxEnt => run_maxent(&bundle.mdp, expert, &lcfg)?.history,
        Algorithm::Messi | Algorithm::MessiMax => {
            let ts = training_set(cfg.mixture_for(spec).expect("semi-supervised"))?;
            run_messi(&bundle.mdp, &ts, &lcfg)?.history
        }
        Algorithm::EmMaxEnt => {
            let ts = training_set(cfg.mixture_for(spec).expect("semi-supervised"))?;
            let eta = spec.eta.unwrap_or(cfg.eta);
            let rounds = cfg.iterations.div_ceil(eta);
            let mut history = em_maxent(&bundle.mdp, &ts, &lcfg, eta, rounds)?.history;
            history.truncate(cfg.iterations + 1);
            history
        }
    })
}

fn run_seed(cfg: &ExperimentConfig, axis_value: Option<f64>, seed: u64) -> Result<Vec<RunRecord>, RunError> {
    let wrap = |algorithm: &str| {
        let algorithm = algorithm.to_string();
        move |source| RunError::Learner {
            seed,
            algorithm,
            source,
        }
    };
    let bundle = build_environment(&cfg.environment, seed).map_err(wrap("environment"))?;
    let expert = generate_expert(&bundle, cfg.l, &mut stream_rng(seed, Stream::Expert))
        .map_err(wrap("expert"))?;
    cfg.algorithms
        .iter()
        .map(|spec| {
            let label = cfg.label_for(spec);
            let history = run_algorithm(cfg, &bundle, &expert, spec, seed).map_err(wrap(&label))?;
            let metrics = history
                .iter()
                .map(|r| bundle.metric.evaluate(&r.expected_fc))
                .collect::<irl_core::Result<Vec<_>>>()
                .map_err(wrap(&label))?;
            Ok(RunRecord {
                axis_value,
                seed,
                algorithm: label,
                metrics,
                max_theta_norm: history.iter().map(|r| inf_norm(&r.theta)).fold(0.0, f64::max),
                final_theta: history.last().expect("non-empty history").theta.clone(),
            })
        })
        .collect()
}

fn execute(
    cfg: &ExperimentConfig,
    axis: Option<Axis>,
    points: Vec<(Option<f64>, ExperimentConfig)>,
) -> Result<ExperimentResult, RunError> {
    let seeds = cfg.seed_list();
    let jobs: Vec<(Option<f64>, &ExperimentConfig, u64)> = points
        .iter()
        .flat_map(|(v, c)| seeds.iter().map(move |&s| (*v, c, s)))
        .collect();
    let batches = jobs
        .par_iter()
        .map(|&(v, c, s)| run_seed(c, v, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult {
        environment: cfg.environment.name().to_string(),
        axis,
        labels: cfg.algorithms.iter().map(|a| cfg.label_for(a)).collect(),
        axis_values: points.iter().map(|(v, _)| *v).collect(),
        seeds,
        records: batches.into_iter().flatten().collect(),
    })
}

/// Every configured algorithm on every seed at the configured parameters.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, RunError> {
    cfg.validate()?;
    execute(cfg, None, vec![(None, cfg.clone())])
}

/// Values swept when the configuration does not list any for `axis`.
pub fn default_axis_values(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::Iterations => Vec::new(),
        Axis::U => vec![0.0, 5.0, 10.0, 20.0, 40.0],
        Axis::Nu => vec![0.0, 0.15, 0.5, 1.0],
        Axis::Lambda0 => vec![0.0, 0.01, 0.05, 0.1, 0.5],
    }
}

/// Reruns the experiment once per value of `axis` with shared seeds. The
/// iterations axis needs a single run since every history covers it.
pub fn sweep(cfg: &ExperimentConfig, axis: Axis) -> Result<ExperimentResult, RunError> {
    cfg.validate()?;
    if axis == Axis::Iterations {
        return execute(cfg, Some(axis), vec![(None, cfg.clone())]);
    }
    let values = match &cfg.sweep {
        Some(s) if s.axis == axis => s.values.clone(),
        _ => default_axis_values(axis),
    };
    let points = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            match axis {
                Axis::U => c.u = v as usize,
                Axis::Nu => c.nu = v,
                Axis::Lambda0 => c.lambda0 = v,
                Axis::Iterations => unreachable!(),
            }
            c.sweep = None;
            c.validate()?;
            Ok((Some(v), c))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    execute(cfg, Some(axis), points)
}
