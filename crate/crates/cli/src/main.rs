//! `deepssm`: train, predict, evaluate, and ablate the deep state-space
//! motion predictor from the command line.
//!
//! Failures print one line to stderr in the form `error: <category>:
//! <message>` and exit nonzero.

mod commands;
mod config;
mod error;
mod manifest;
mod table;

use clap::{Parser, Subcommand};

use commands::{ablate, evaluate, gendata, predict, train};

#[derive(Parser)]
#[command(
    name = "deepssm",
    version,
    about = "Deep state-space human motion prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint, training log, and manifest.
    Train(train::TrainArgs),
    /// Predict future frames from an observed sequence file.
    Predict(predict::PredictArgs),
    /// Report MPJPE tables for a checkpoint and/or the trivial baselines.
    Evaluate(evaluate::EvaluateArgs),
    /// Train and evaluate the nine component-removal configurations.
    Ablate(ablate::AblateArgs),
    /// Generate a synthetic dataset on disk.
    GenData(gendata::GenDataArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => train::run(args),
        Command::Predict(args) => predict::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Ablate(args) => ablate::run(args),
        Command::GenData(args) => gendata::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
