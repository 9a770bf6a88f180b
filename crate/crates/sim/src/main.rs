use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use glider_core::harness::sweep::{sweep, sweep_csv, SweepParam};
use glider_core::harness::{replay, run, HarnessError};
use glider_core::scenario::{load_scenario, ScenarioConfig, ScenarioError};

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DEFECT: u8 = 4;

/// Deterministic simulator for a wave and solar powered surface vehicle.
#[derive(Debug, Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds; must be a whole number of steps.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Vary one foil parameter and tabulate thrust and speed.
    Sweep {
        /// foil_count, spacing (mm), limit_angle (deg) or spring_rate (N/mm).
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the summary of an artifact directory from its CSV files.
    Replay {
        #[arg(long)]
        artifacts: PathBuf,
    },
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Scenario(ScenarioError::Io { .. }) | HarnessError::Usage(_) | HarnessError::Io { .. } => {
            EXIT_USAGE
        }
        HarnessError::Scenario(_) | HarnessError::Replay(_) => EXIT_VALIDATION,
        HarnessError::NonFinite { .. } | HarnessError::Module { .. } => EXIT_DEFECT,
    }
}

fn with_overrides(mut cfg: ScenarioConfig, seed: Option<u64>, duration: Option<f64>) -> Result<ScenarioConfig, HarnessError> {
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(d) = duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            scenario,
            out,
            seed,
            duration,
        } => {
            let cfg = with_overrides(load_scenario(&scenario)?, seed, duration)?;
            let artifacts = run(&cfg)?;
            artifacts.write_to(&out)?;
            print!("{}", artifacts.summary.to_json());
            eprintln!("artifacts written to {}", out.display());
        }
        Command::Sweep {
            param,
            values,
            scenario,
            out,
        } => {
            let param = SweepParam::parse(&param)?;
            let base = load_scenario(&scenario)?;
            let rows = sweep(param, &values, &base)?;
            let table = sweep_csv(param, &rows);
            std::fs::create_dir_all(&out).map_err(|source| HarnessError::Io {
                path: out.clone(),
                source,
            })?;
            let path = out.join(format!("sweep_{}.csv", param.name()));
            std::fs::write(&path, &table).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            print!("{table}");
            eprintln!("sweep written to {}", path.display());
        }
        Command::Replay { artifacts } => {
            let summary = replay(&artifacts)?;
            print!("{}", summary.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
