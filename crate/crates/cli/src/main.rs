//! Command-line front end for the cantilever simulation engine.
//!
//! Exit codes: 0 on success (a flagged blow-up is a scientific result, not a
//! failure), 1 for usage/configuration problems, 2 for numerical failures.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::SimulationConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "inexbeam",
    version,
    about = "Spectral-Galerkin simulation of an inextensible cantilever beam"
)]
struct Cli {
    /// Experiment definition (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output location: a directory for simulate/sweep, a file for modes.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for cached assembled tensors.
    #[arg(long, global = true)]
    tensor_cache: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Permit nonlinear inertia without damping (exploration only).
    #[arg(long, global = true)]
    allow_undamped_inertia: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the mode table (wavenumbers, coefficients, residuals) as CSV.
    Modes {
        /// Mode count (default: config n_modes, else 6).
        #[arg(long)]
        n: Option<usize>,
        /// Beam length (default: config beam.length, else 1).
        #[arg(long)]
        length: Option<f64>,
    },
    /// Run one simulation from --config into --out.
    Simulate,
    /// Run one simulation per value of a scalar config parameter.
    Sweep {
        /// Dotted config path, e.g. beam.k2 or initial.0.q0.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values (one argument, e.g. "0.01,0.02").
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Fit an exponential decay rate to a trajectory CSV.
    Decay {
        /// Trajectory CSV (needs t and E_total columns).
        #[arg(long)]
        input: PathBuf,
        /// Fit window "t_start,t_end" (default: full range).
        #[arg(long)]
        window: Option<String>,
        /// Energy floor; samples at or below it are dropped.
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
    },
    /// Estimate an observed convergence order.
    Converge {
        /// CSV of (dt, error) pairs.
        #[arg(long)]
        errors: Option<PathBuf>,
        /// Trajectory CSVs from a dt-refinement study (same record_every),
        /// comma-separated.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        trajectories: Vec<PathBuf>,
    },
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| anyhow::anyhow!("configuring thread pool: {e}"))?;
    }
    let config = match &cli.config {
        Some(path) => Some(SimulationConfig::load(path)?),
        None => None,
    };
    let require_config = |what: &str| -> anyhow::Result<&SimulationConfig> {
        config
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("{what} requires --config <path>"))
    };
    let out_dir = |config: &SimulationConfig| -> PathBuf {
        cli.out
            .clone()
            .or_else(|| config.run.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    };

    match &cli.command {
        Command::Modes { n, length } => {
            commands::cmd_modes(config.as_ref(), *n, *length, cli.out.as_deref())
        }
        Command::Simulate => {
            let config = require_config("simulate")?;
            let summary = commands::cmd_simulate(
                config,
                &out_dir(config),
                cli.tensor_cache.as_deref(),
                cli.allow_undamped_inertia,
            )?;
            if summary.blowup {
                eprintln!(
                    "blow-up at t = {}: {}",
                    summary.blowup_time.unwrap_or(f64::NAN),
                    summary.blowup_detail.as_deref().unwrap_or("")
                );
            }
            Ok(())
        }
        Command::Sweep { param, values } => {
            let config = require_config("sweep")?;
            commands::cmd_sweep(
                config,
                param,
                values,
                &out_dir(config),
                cli.tensor_cache.as_deref(),
                cli.allow_undamped_inertia,
            )
        }
        Command::Decay {
            input,
            window,
            floor,
        } => {
            let window = window
                .as_deref()
                .map(commands::parse_window)
                .transpose()?;
            commands::cmd_decay(input, window, *floor)
        }
        Command::Converge {
            errors,
            trajectories,
        } => commands::cmd_converge(errors.as_deref(), trajectories),
    }
}

/// Numerical failures (exit 2) are the engine errors that arise while
/// computing; everything else is a usage/config problem (exit 1).
fn is_numerical_failure(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<inexbeam::Error>(),
            Some(
                inexbeam::Error::NewtonDidNotConverge { .. }
                    | inexbeam::Error::FactorizationFailure { .. }
                    | inexbeam::Error::SingularMatrix { .. }
                    | inexbeam::Error::NonFinite { .. }
                    | inexbeam::Error::NonFiniteSample { .. }
                    | inexbeam::Error::NonFiniteState { .. }
                    | inexbeam::Error::RootTolerance { .. }
                    | inexbeam::Error::BracketingFailure { .. }
            )
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_numerical_failure(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
