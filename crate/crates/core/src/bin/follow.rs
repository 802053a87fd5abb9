use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use follow_core::bench::Draws;
use follow_core::cli::{cmd_bench, cmd_calibrate, cmd_priors, cmd_run, CliError};
use follow_core::simworld::Mode;

#[derive(Parser)]
#[command(name = "follow", version, about = "Simulated person-following vehicle")]
struct Cli {
    /// Scenario config file; repeat to layer files, later ones win.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,
    /// Output file (trace JSONL, bench CSV or calibration TOML).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Deterministic)]
    mode: ModeArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Deterministic,
    Concurrent,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop episode.
    Run,
    /// Compare detector latency profiles.
    Bench {
        /// Summarize the recorded samples as-is instead of resampling.
        #[arg(long, conflicts_with = "draws")]
        exact: bool,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        /// Backend to include; repeatable. Defaults to the three SSD variants.
        #[arg(long)]
        backend: Vec<String>,
    },
    /// Derive bracket thresholds from a grid of target placements.
    Calibrate {
        /// Grid overrides, e.g. "lateral=-0.8,0,0.8;distance=1.5,2,2.5;near=1.75".
        #[arg(long)]
        grid: Option<String>,
    },
    /// Count SSD default boxes per feature-map layer.
    Priors {
        /// Comma-separated SIDExBOXES layers, e.g. "38x4,19x6".
        #[arg(long)]
        layers: Option<String>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    let mode = match cli.mode {
        ModeArg::Deterministic => Mode::Deterministic,
        ModeArg::Concurrent => Mode::Concurrent,
    };
    match cli.command {
        Command::Run => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("trace.jsonl"));
            cmd_run(&cli.config, &out, cli.seed, mode, &mut stdout).map(drop)
        }
        Command::Bench { exact, draws, backend } => {
            let draws = if exact { Draws::Exact } else { Draws::Resample(draws) };
            let out = cli.out.unwrap_or_else(|| PathBuf::from("bench.csv"));
            cmd_bench(&backend, draws, cli.seed.unwrap_or(0), &out, &mut stdout).map(drop)
        }
        Command::Calibrate { grid } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("calibration.toml"));
            cmd_calibrate(&cli.config, grid.as_deref(), &out, &mut stdout).map(drop)
        }
        Command::Priors { layers } => cmd_priors(layers.as_deref(), &mut stdout).map(drop),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
