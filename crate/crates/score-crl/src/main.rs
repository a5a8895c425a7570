//! Thin CLI over the library: config-driven experiment runs, parameter
//! sweeps, the intervention-extrapolation report, config validation, and the
//! property suite.

use clap::{Parser, Subcommand};
use score_crl::harness::{self, ExperimentConfig, SweepAxis};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "score-crl",
    version,
    about = "Score-based causal representation learning from interventions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write runs.csv / aggregate.csv /
    /// manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for graph-level parallelism (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Replaces the config's master seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Run one experiment per value of a swept parameter and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One of: n-samples, noise-var, observed-dim, density.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. 5000,10000,50000.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Check the intervention-extrapolation identity and write
    /// extrapolation.csv.
    Extrapolate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Parse and validate a config file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the property suite (optionally only cases whose name contains the
    /// filter).
    Proptest {
        #[arg(long)]
        filter: Option<String>,
    },
}

fn load(path: &std::path::Path, seed_override: Option<u64>) -> Result<ExperimentConfig, String> {
    let mut config = ExperimentConfig::from_path(path).map_err(|e| e.to_string())?;
    if let Some(seed) = seed_override {
        config.experiment.master_seed = seed;
    }
    Ok(config)
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            workers,
            seed_override,
        } => {
            let config = load(&config, seed_override)?;
            let summary =
                harness::run_experiment(&config, Some(&out), workers).map_err(|e| e.to_string())?;
            println!(
                "config {} over {} graphs:",
                summary.config_hash,
                summary.records.len()
            );
            for a in &summary.aggregates {
                println!("  {:<8} {:.4} ± {:.4}", a.metric, a.mean, a.std_error);
            }
            println!("outputs written to {}", out.display());
            Ok(())
        }
        Command::Sweep {
            config,
            out,
            axis,
            values,
            workers,
            seed_override,
        } => {
            let config = load(&config, seed_override)?;
            let points = harness::run_sweep(&config, axis, &values, Some(&out), workers)
                .map_err(|e| e.to_string())?;
            for point in &points {
                let snr = point
                    .mean_snr_db
                    .map(|v| format!(" (snr {v:.1} dB)"))
                    .unwrap_or_default();
                let shd = point
                    .summary
                    .aggregates
                    .iter()
                    .find(|a| a.metric == "shd")
                    .map(|a| a.mean)
                    .unwrap_or(f64::NAN);
                println!("value {}{}: mean shd {:.3}", point.value, snr, shd);
            }
            println!("sweep.csv written to {}", out.display());
            Ok(())
        }
        Command::Extrapolate {
            config,
            out,
            seed_override,
        } => {
            let config = load(&config, seed_override)?;
            let records =
                harness::run_extrapolation(&config, Some(&out)).map_err(|e| e.to_string())?;
            let max = records
                .iter()
                .map(|r| r.max_residual)
                .fold(0.0f64, f64::max);
            let mean =
                records.iter().map(|r| r.mean_residual).sum::<f64>() / records.len().max(1) as f64;
            println!(
                "{} environment pairs: max residual {max:.3e}, mean residual {mean:.3e}",
                records.len()
            );
            println!("extrapolation.csv written to {}", out.display());
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let config = load(&config, None)?;
            println!("config ok (hash {})", config.hash());
            Ok(())
        }
        Command::Proptest { filter } => {
            let report = score_crl::proptests::run_property_suite(filter.as_deref());
            print!("{}", report.render());
            if report.all_passed() {
                Ok(())
            } else {
                Err("property suite failed".into())
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
