use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use irl_harness::config::{Axis, ExperimentConfig};
use irl_harness::output::{write_all, BASELINE};
use irl_harness::runner::{run_experiment, sweep, ExperimentResult};

#[derive(Parser)]
#[command(name = "irl", about = "Seeded MaxEnt-IRL / MESSI experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm at the configured parameters.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Rerun the experiment across the values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of iterations, u, nu, lambda0.
        #[arg(long)]
        axis: Axis,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV output (default: the config's output, else ./results).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of repetitions; replaces any explicit seed list.
    #[arg(long)]
    reps: Option<usize>,
    /// First seed of the repetition range.
    #[arg(long)]
    seed_base: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(reps) = self.reps {
            cfg.reps = reps;
            cfg.seeds.clear();
        }
        if let Some(base) = self.seed_base {
            cfg.seed_base = base;
            cfg.seeds.clear();
        }
        cfg.validate()?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("results"));
        Ok((cfg, out))
    }
}

fn fmt_axis(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn summarize(result: &ExperimentResult) {
    println!(
        "{}: {} seeds, algorithms {}, max |theta|_inf {:.3}",
        result.environment,
        result.seeds.len(),
        result.labels.join(", "),
        result.max_theta_norm()
    );
    for &axis_value in &result.axis_values {
        for label in &result.labels {
            let xs = result.final_metrics(label, axis_value);
            println!(
                "  axis={:<6} {:<24} final metric {:>12.6} ± {:.6}",
                fmt_axis(axis_value),
                label,
                irl_harness::stats::mean(&xs),
                irl_harness::stats::std_error(&xs)
            );
        }
    }
    for row in result.compare_to(BASELINE) {
        println!(
            "  axis={:<6} {:<24} - {}: {:+.6} (t = {:.3}, one-sided p = {:.4})",
            fmt_axis(row.axis_value),
            row.algorithm,
            row.baseline,
            row.test.mean_diff,
            row.test.t,
            row.test.p_value
        );
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Run { common } => {
            let (cfg, out) = common.load()?;
            (
                (cfg.clone(), out),
                run_experiment(&cfg).context("experiment failed")?,
            )
        }
        Command::Sweep { common, axis } => {
            let (cfg, out) = common.load()?;
            (
                (cfg.clone(), out),
                sweep(&cfg, *axis).context("sweep failed")?,
            )
        }
    };
    let (cfg, out) = common;
    write_all(&out, &cfg, &result)?;
    summarize(&result);
    println!("wrote {}", out.display());
    Ok(())
}
