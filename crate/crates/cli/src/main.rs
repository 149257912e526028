//! `qcrisk`: run quantum-classifier experiments from a TOML configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Context, Log};
use config::{ExperimentConfig, Purpose};

#[derive(Parser)]
#[command(name = "qcrisk", version, about = "Train, diagnose and bound variational quantum classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML). Built-in parity defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replaces every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Train classifiers and write per-epoch records, a summary and geometry.
    Train,
    /// Sweep model sizes, fit the risk curve and locate its minimum.
    Riskcurve,
    /// Feature-state geometry of a saved or random classifier.
    Diagnose,
    /// Concentration of random-parameter circuits.
    Concentrate,
    /// Generalization bound for a dataset and, optionally, a trained model.
    Bound,
}

impl Command {
    fn purpose(self) -> Purpose {
        match self {
            Command::Train => Purpose::Train,
            Command::Riskcurve => Purpose::RiskCurve,
            Command::Diagnose => Purpose::Diagnose,
            Command::Concentrate => Purpose::Concentrate,
            Command::Bound => Purpose::Bound,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| CliError::Validation(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.override_seed(s);
    }
    config.validate(cli.command.purpose()).map_err(|errs| {
        CliError::Validation(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;
    let out_dir = cli.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { config, out_dir, log: Log { quiet: cli.quiet } };
    match cli.command {
        Command::Train => commands::train(&ctx),
        Command::Riskcurve => commands::riskcurve(&ctx),
        Command::Diagnose => commands::diagnose(&ctx),
        Command::Concentrate => commands::concentrate(&ctx),
        Command::Bound => commands::bound(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcrisk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
