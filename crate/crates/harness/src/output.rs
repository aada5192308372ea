//! CSV output.
//!
//! * `runs.csv`: `axis_value, seed, iteration, metric, algorithm`
//! * `aggregate.csv`: `axis_value, algorithm, iteration, mean, stderr, n`
//! * `comparisons.csv`: paired one-sided tests against MaxEnt-IRL

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Axis, ExperimentConfig};
use crate::runner::ExperimentResult;

#[derive(Serialize)]
struct RunRow<'a> {
    axis_value: Option<f64>,
    seed: u64,
    iteration: usize,
    metric: f64,
    algorithm: &'a str,
}

#[derive(Serialize)]
struct AggregateCsvRow<'a> {
    axis_value: Option<f64>,
    algorithm: &'a str,
    iteration: usize,
    mean: f64,
    stderr: f64,
    n: usize,
}

#[derive(Serialize)]
struct ComparisonCsvRow<'a> {
    axis_value: Option<f64>,
    algorithm: &'a str,
    baseline: &'a str,
    mean_diff: f64,
    stderr: f64,
    t: f64,
    p_value: f64,
    n: usize,
}

pub const BASELINE: &str = "maxent";

pub fn write_runs<W: Write>(result: &ExperimentResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &result.records {
        for (t, &metric) in r.metrics.iter().enumerate() {
            let axis_value = match result.axis {
                Some(Axis::Iterations) => Some(t as f64),
                _ => r.axis_value,
            };
            w.serialize(RunRow {
                axis_value,
                seed: r.seed,
                iteration: t,
                metric,
                algorithm: &r.algorithm,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(result: &ExperimentResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in result.aggregate() {
        w.serialize(AggregateCsvRow {
            axis_value: row.axis_value,
            algorithm: &row.algorithm,
            iteration: row.iteration,
            mean: row.mean,
            stderr: row.stderr,
            n: row.n,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparisons<W: Write>(result: &ExperimentResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in result.compare_to(BASELINE) {
        w.serialize(ComparisonCsvRow {
            axis_value: row.axis_value,
            algorithm: &row.algorithm,
            baseline: &row.baseline,
            mean_diff: row.test.mean_diff,
            stderr: row.test.std_error,
            t: row.test.t,
            p_value: row.test.p_value,
            n: row.test.n,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the three CSV files and the effective configuration into `dir`.
pub fn write_all(dir: &Path, cfg: &ExperimentConfig, result: &ExperimentResult) -> anyhow::Result<()> {
    use anyhow::Context;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let create = |name: &str| {
        let path = dir.join(name);
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
    };
    write_runs(result, create("runs.csv")?)?;
    write_aggregate(result, create("aggregate.csv")?)?;
    write_comparisons(result, create("comparisons.csv")?)?;
    serde_json::to_writer_pretty(create("config.json")?, cfg)?;
    Ok(())
}
