//! `dii`: detect disaster-impacted grid cells from pre/post feature masks.
//!
//! Exit status: 0 on success, 1 when the analysis fails (for example an
//! empty reference mask), 2 for unusable inputs, flags or configuration.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::EvalMode;
use settings::Flags;

#[derive(Debug, Parser)]
#[command(name = "dii", version, about = "Gridded disaster impact mapping from pre/post feature masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the denoised change mask (features present before, gone after)
    Change {
        before: PathBuf,
        after: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Grid a change mask, compute the per-cell impact index and threshold it
    Dii {
        change: PathBuf,
        before: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Score a prediction against ground truth
    Eval {
        pred: PathBuf,
        truth: PathBuf,
        #[arg(long, value_enum)]
        mode: EvalMode,
        #[command(flatten)]
        flags: Flags,
    },
    /// Generate a synthetic scenario from the [synth] table of a config file
    Synth { config: PathBuf, out_dir: PathBuf },
    /// Change extraction, impact index and (given a truth mask) evaluation
    Run {
        before: PathBuf,
        after: PathBuf,
        /// Ground-truth change mask
        truth: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Change { before, after, flags } => commands::change(before, after, flags),
        Command::Dii { change, before, flags } => commands::dii(change, before, flags),
        Command::Eval {
            pred,
            truth,
            mode,
            flags,
        } => commands::eval(pred, truth, *mode, flags),
        Command::Synth { config, out_dir } => commands::synth(config, out_dir),
        Command::Run {
            before,
            after,
            truth,
            flags,
        } => commands::run(before, after, truth.as_deref(), flags),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}
