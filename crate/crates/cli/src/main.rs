use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rqm_core::stats::{compare, expected_distribution, frequency_table, run, RunError, RunOptions};
use rqm_core::{parse, ScenarioSpec};

/// Reactive cellular-automaton quantum toy world.
#[derive(Parser)]
#[command(name = "rqm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its detection report.
    Run(RunArgs),
    /// Run every slit variant of a scenario and print the frequency table.
    Compare(CompareArgs),
    /// Print the state fractions of the superposition first reaching a detector.
    Expect(ExpectArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Instants to run; defaults to the scenario's `[run] instants`.
    #[arg(long)]
    instants: Option<u64>,
    /// RNG seed; defaults to the scenario's `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Write a P6 frame per rendered instant into this directory.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Render one instant out of K.
    #[arg(long, value_name = "K", default_value_t = 1)]
    frame_every: u64,
    /// Pixels per cell side.
    #[arg(long, default_value_t = 1)]
    scale: u32,
    /// Keep every display on later frames.
    #[arg(long)]
    remanence: bool,
    /// Write an ASCII dump next to each frame.
    #[arg(long)]
    ascii: bool,
    /// Write per-detector counts as CSV to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Micro-steps allowed per instant before the run is declared divergent.
    #[arg(long, value_name = "N")]
    step_budget: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Write the table to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExpectArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    detector: usize,
}

enum Failure {
    Scenario(String),
    Divergence(String),
    Other(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Scenario(_) => Failure::Scenario(e.to_string()),
            RunError::Kernel(rqm_core::KernelError::Divergence { .. }) => Failure::Divergence(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<ScenarioSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::Scenario(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let spec = load(&args.common.scenario)?;
            let options = RunOptions {
                frames: args.frames,
                frame_every: args.frame_every,
                remanence: args.remanence,
                ascii: args.ascii,
                scale: args.scale,
                step_budget: args.step_budget,
            };
            let instants = args.common.instants.unwrap_or(spec.run_length);
            let seed = args.common.seed.unwrap_or(spec.seed);
            let report = run(&spec, instants, seed, &options)?;
            if let Some(path) = args.stats {
                write(&path, &report.to_csv())?;
            }
            print!("{}", report.to_text());
        }
        Command::Compare(args) => {
            let spec = load(&args.common.scenario)?;
            let instants = args.common.instants.unwrap_or(spec.run_length);
            let seed = args.common.seed.unwrap_or(spec.seed);
            let table = frequency_table(&compare(&spec, instants, seed)?);
            match args.out {
                Some(path) => write(&path, &table)?,
                None => print!("{table}"),
            }
        }
        Command::Expect(args) => {
            let spec = load(&args.scenario)?;
            let fractions = expected_distribution(&spec, args.detector)?;
            println!("state,fraction");
            for (state, f) in fractions.iter().enumerate() {
                println!("{state},{f:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Scenario(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Divergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
