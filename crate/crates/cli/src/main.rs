//! `agricarb` — territorial carbon-footprint scenarios for digital
//! agriculture.
//!
//! Three verbs: `run` executes one scenario and writes its tables, `compare`
//! prints several scenarios side by side, `validate` dry-runs the input
//! checks. Exit codes: 0 success, 1 configuration error, 2 engine error,
//! 3 Monte Carlo failure threshold exceeded.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod pipeline;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use agricarb_core::report::Delimiter;
use agricarb_core::Error as CoreError;
use clap::{Parser, Subcommand, ValueEnum};

use pipeline::Overrides;

/// Anything the CLI can fail with, already sorted into its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or inputs — exit 1.
    Config(String),
    /// The engine could not complete a computation or write results — exit 2.
    Engine(String),
    /// Too many Monte Carlo samples failed — exit 3.
    Sensitivity(String),
}

impl CliError {
    /// Classify an engine-phase core error; the sensitivity threshold keeps
    /// its dedicated exit code wherever it surfaces.
    fn engine(e: CoreError) -> Self {
        match e {
            CoreError::SensitivityFailure { .. } => Self::Sensitivity(e.to_string()),
            _ => Self::Engine(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Engine(_) => 2,
            Self::Sensitivity(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) | Self::Engine(m) | Self::Sensitivity(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(
    name = "agricarb",
    version,
    about = "Territorial carbon footprint of digital-agriculture deployments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory override (beats the AGRICARB_OUT environment
    /// variable and the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the Monte Carlo stage (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table format for outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Tsv,
}

impl From<Format> for Delimiter {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Delimiter::Csv,
            Format::Tsv => Delimiter::Tsv,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario end to end and write its tables.
    Run { config: PathBuf },
    /// Run several scenarios and print an aligned comparison table.
    Compare { configs: Vec<PathBuf> },
    /// Check a configuration without computing anything.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // First caller wins; a later failure only means the pool was already
        // initialised, which is fine for a short-lived process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        format: cli.format.into(),
    };

    let outcome = match cli.command {
        Command::Run { config } => pipeline::run(&config, &overrides),
        Command::Compare { configs } => pipeline::compare(&configs, &overrides),
        Command::Validate { config } => {
            let findings = pipeline::validate(&config);
            if findings.is_empty() {
                println!("OK");
            } else {
                for finding in findings {
                    println!("{finding}");
                }
            }
            Ok(())
        }
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
