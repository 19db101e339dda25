//! Command-line front end for the sarcasm baseline: data preparation,
//! training, evaluation and plotting over a shared output directory.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod plot;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub use config::{RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sarcbench", version, about = "Context-free sarcasm detection baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, sample, clean and split the corpus.
    Prepare(RunArgs),
    /// Fit features and models on the training split.
    Train(RunArgs),
    /// Score saved models on the test split.
    Evaluate(RunArgs),
    /// Draw the Naive Bayes confusion matrix and ROC curve.
    Plot(RunArgs),
    /// Prepare, train, evaluate and plot in one go.
    RunAll(RunArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(a) => {
            let m = commands::prepare(&RunConfig::try_from(a)?)?;
            println!(
                "train: {} rows {:?}, test: {} rows {:?}",
                m.train.rows, m.train.class_counts, m.test.rows, m.test.class_counts
            );
        }
        Command::Train(a) => {
            let outcome = commands::train(&RunConfig::try_from(a)?)?;
            for (kind, path) in &outcome.written {
                println!("{kind}: {}", path.display());
            }
            commands::check_training(&outcome)?;
        }
        Command::Evaluate(a) => {
            let (_, report) = commands::evaluate(&RunConfig::try_from(a)?)?;
            print!("{report}");
        }
        Command::Plot(a) => {
            for p in commands::plot(&RunConfig::try_from(a)?)? {
                println!("{}", p.display());
            }
        }
        Command::RunAll(a) => {
            let report = commands::run_all(&RunConfig::try_from(a)?)?;
            print!("{report}");
        }
    }
    Ok(())
}
