//! Experiment configuration, read from JSON.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use irl_core::datagen::MixtureKind;
use irl_core::env::{GridworldParams, HighwayParams, PitParams};
use irl_core::irl::{Planner, Similarity};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    Gridworld(GridworldParams),
    Highway(HighwayParams),
    Pit(PitParams),
}

impl EnvironmentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentSpec::Gridworld(_) => "gridworld",
            EnvironmentSpec::Highway(_) => "highway",
            EnvironmentSpec::Pit(_) => "pit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "maxent")]
    MaxEnt,
    #[serde(rename = "messi")]
    Messi,
    #[serde(rename = "messimax")]
    MessiMax,
    #[serde(rename = "em-maxent", alias = "em_maxent")]
    EmMaxEnt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MaxEnt => "maxent",
            Algorithm::Messi => "messi",
            Algorithm::MessiMax => "messimax",
            Algorithm::EmMaxEnt => "em-maxent",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One learner in an experiment. Unset fields fall back to the experiment-wide values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<usize>,
    /// Column value in the output; defaults to a name derived from the algorithm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl AlgorithmSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        AlgorithmSpec {
            algorithm,
            mixture: None,
            eta: None,
            label: None,
        }
    }

    pub fn with_mixture(mut self, mixture: MixtureKind) -> Self {
        self.mixture = Some(mixture);
        self
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlgorithmEntry {
    Name(Algorithm),
    Full(AlgorithmSpec),
}

fn algorithms_from_entries<'de, D>(de: D) -> Result<Vec<AlgorithmSpec>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let entries = Vec::<AlgorithmEntry>::deserialize(de)?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            AlgorithmEntry::Name(a) => AlgorithmSpec::new(a),
            AlgorithmEntry::Full(s) => s,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Iterations,
    U,
    Nu,
    #[serde(alias = "lambda")]
    Lambda0,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Iterations => "iterations",
            Axis::U => "u",
            Axis::Nu => "nu",
            Axis::Lambda0 => "lambda0",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterations" => Ok(Axis::Iterations),
            "u" => Ok(Axis::U),
            "nu" => Ok(Axis::Nu),
            "lambda0" | "lambda" => Ok(Axis::Lambda0),
            other => Err(invalid(format!(
                "unknown sweep axis {other:?} (expected iterations, u, nu or lambda0)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Ignored for the iterations axis, whose points all come from one history.
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    #[serde(
        default = "default_algorithms",
        deserialize_with = "algorithms_from_entries"
    )]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_mixture")]
    pub mixture: MixtureKind,
    #[serde(default = "default_l")]
    pub l: usize,
    #[serde(default = "default_u")]
    pub u: usize,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_iterations", alias = "T")]
    pub iterations: usize,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default = "default_eta")]
    pub eta: usize,
    #[serde(default = "default_planner")]
    pub planner: Planner,
    /// Overrides the environment's default similarity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<Similarity>,
    /// Explicit seeds; when empty, `seed_base..seed_base + reps` is used.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_algorithms() -> Vec<AlgorithmSpec> {
    vec![
        AlgorithmSpec::new(Algorithm::MaxEnt),
        AlgorithmSpec::new(Algorithm::Messi),
        AlgorithmSpec::new(Algorithm::MessiMax),
    ]
}
fn default_mixture() -> MixtureKind {
    MixtureKind::Mu1
}
fn default_l() -> usize {
    1
}
fn default_u() -> usize {
    20
}
fn default_nu() -> f64 {
    0.5
}
fn default_lambda0() -> f64 {
    0.05
}
fn default_theta_max() -> f64 {
    500.0
}
fn default_iterations() -> usize {
    100
}
fn default_step_size() -> f64 {
    50.0
}
fn default_eta() -> usize {
    5
}
fn default_planner() -> Planner {
    Planner::FiniteHorizon
}
fn default_reps() -> usize {
    20
}

impl ExperimentConfig {
    /// All defaults on the given environment.
    pub fn new(environment: EnvironmentSpec) -> Self {
        ExperimentConfig {
            environment,
            algorithms: default_algorithms(),
            mixture: default_mixture(),
            l: default_l(),
            u: default_u(),
            nu: default_nu(),
            lambda0: default_lambda0(),
            theta_max: default_theta_max(),
            iterations: default_iterations(),
            step_size: default_step_size(),
            eta: default_eta(),
            planner: default_planner(),
            similarity: None,
            seeds: Vec::new(),
            reps: default_reps(),
            seed_base: 0,
            sweep: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.reps as u64).map(|k| self.seed_base + k).collect()
        } else {
            self.seeds.clone()
        }
    }

    /// Mixture an algorithm samples its unsupervised set from, if any.
    pub fn mixture_for(&self, spec: &AlgorithmSpec) -> Option<MixtureKind> {
        match spec.algorithm {
            Algorithm::MaxEnt => None,
            Algorithm::MessiMax => Some(MixtureKind::Ustar),
            Algorithm::Messi | Algorithm::EmMaxEnt => Some(spec.mixture.unwrap_or(self.mixture)),
        }
    }

    pub fn label_for(&self, spec: &AlgorithmSpec) -> String {
        if let Some(label) = &spec.label {
            return label.clone();
        }
        match spec.algorithm {
            Algorithm::MaxEnt | Algorithm::MessiMax => spec.algorithm.name().to_string(),
            Algorithm::Messi => format!("messi-{}", self.mixture_for(spec).unwrap().name()),
            Algorithm::EmMaxEnt => format!(
                "{}-em-maxent-{}",
                spec.eta.unwrap_or(self.eta),
                self.mixture_for(spec).unwrap().name()
            ),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms must not be empty"));
        }
        let mut labels = HashSet::new();
        for spec in &self.algorithms {
            if spec.algorithm == Algorithm::MessiMax
                && spec.mixture.is_some_and(|m| m != MixtureKind::Ustar)
            {
                return Err(invalid("messimax always samples from ustar; drop its mixture"));
            }
            if spec.eta == Some(0) {
                return Err(invalid("eta must be at least 1"));
            }
            if !labels.insert(self.label_for(spec)) {
                return Err(invalid(format!(
                    "duplicate algorithm label {:?}; set distinct labels",
                    self.label_for(spec)
                )));
            }
        }
        if self.l < 1 {
            return Err(invalid("l must be at least 1"));
        }
        check_nu(self.nu)?;
        check_lambda0(self.lambda0)?;
        if !(self.theta_max > 0.0) || !self.theta_max.is_finite() {
            return Err(invalid("theta_max must be positive and finite"));
        }
        if self.iterations < 1 {
            return Err(invalid("iterations must be at least 1"));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(invalid("step_size must be positive and finite"));
        }
        if self.eta < 1 {
            return Err(invalid("eta must be at least 1"));
        }
        if self.seeds.is_empty() && self.reps < 1 {
            return Err(invalid("reps must be at least 1"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(invalid(format!("seed {dup} is listed twice")));
        }
        if let Some(sweep) = &self.sweep {
            self.validate_sweep(sweep)?;
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: &SweepSpec) -> Result<(), ConfigError> {
        if sweep.axis == Axis::Iterations {
            return Ok(());
        }
        if sweep.values.is_empty() {
            return Err(invalid(format!("sweep over {} needs values", sweep.axis.name())));
        }
        for &v in &sweep.values {
            match sweep.axis {
                Axis::U => {
                    if !(v >= 0.0) || v.fract() != 0.0 || v > u32::MAX as f64 {
                        return Err(invalid(format!("u value {v} is not a non-negative integer")));
                    }
                }
                Axis::Nu => check_nu(v)?,
                Axis::Lambda0 => check_lambda0(v)?,
                Axis::Iterations => unreachable!(),
            }
        }
        Ok(())
    }
}

fn check_nu(nu: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&nu) {
        Ok(())
    } else {
        Err(invalid(format!("nu = {nu} is outside [0, 1]")))
    }
}

fn check_lambda0(lambda0: f64) -> Result<(), ConfigError> {
    if lambda0 >= 0.0 && lambda0.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda0 = {lambda0} must be non-negative and finite")))
    }
}
