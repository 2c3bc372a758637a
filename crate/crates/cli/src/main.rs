use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use biphoton_cli::{run_scenario, RunContext, Scenario};
use biphoton_core::config::ExperimentConfig;

/// Simulation toolkit for cascaded SFG/SPDC frequency-degenerate
/// photon-pair sources.
///
/// Thread count for the internal Monte Carlo / spectrum parallelism can be
/// capped with the RAYON_NUM_THREADS environment variable.
#[derive(Parser)]
#[command(name = "biphoton", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV/JSON outputs plus a manifest.
    Run {
        scenario: ScenarioArg,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the RNG seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a config file and report every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Emit the machine-readable JSON report instead of plain text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    ShgSpectrum,
    RamanFit,
    DpPowerSweep,
    CarVsBandwidth,
    SpVsDp,
    PumpOptimize,
    CweTrajectory,
}

impl From<ScenarioArg> for Scenario {
    fn from(arg: ScenarioArg) -> Self {
        match arg {
            ScenarioArg::ShgSpectrum => Scenario::ShgSpectrum,
            ScenarioArg::RamanFit => Scenario::RamanFit,
            ScenarioArg::DpPowerSweep => Scenario::DpPowerSweep,
            ScenarioArg::CarVsBandwidth => Scenario::CarVsBandwidth,
            ScenarioArg::SpVsDp => Scenario::SpVsDp,
            ScenarioArg::PumpOptimize => Scenario::PumpOptimize,
            ScenarioArg::CweTrajectory => Scenario::CweTrajectory,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, config, out, seed } => {
            let bytes = match std::fs::read(&config) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let sha = hex::encode(Sha256::digest(&bytes));
            let parsed = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let seed = seed.unwrap_or(parsed.seed);
            let ctx = RunContext {
                config: &parsed,
                config_sha256: sha,
                out_dir: &out,
                seed,
            };
            let scenario = Scenario::from(scenario);
            match run_scenario(scenario, &ctx) {
                Ok(outputs) => {
                    for path in outputs {
                        println!("{}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: scenario {} failed: {e}", scenario.name());
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
        }
        Command::Validate { config, json } => {
            let report = ExperimentConfig::validate_file(&config);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else if report.is_ok() {
                println!("{} is valid", config.display());
            } else {
                eprint!("{report}");
            }
            if report.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONFIG)
            }
        }
    }
}
