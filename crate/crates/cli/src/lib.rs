//! Experiment driver for `spoofcal`: argument parsing and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{ExperimentArgs, TrainArgs};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spoofcal", version, about = "Calibrated spoof detection on frozen speech embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a back-end on a manifest; writes model.json and train_report.json.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Training seed (MLP initialization and shuffling).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score evaluation sets with one model; writes metrics, scores,
    /// rejection curve and reliability bins per set.
    Eval {
        #[arg(long, required = true)]
        model: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Like `eval`, scoring with the mean probability of several models.
    Ensemble {
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Training-size study: one model per (size, seed); writes study.csv.
    Study {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Subsample sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Seeds, comma separated [default: 0,1,2].
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Validate EMB1 files and their sidecar manifests.
    ExtractCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

/// Runs a parsed command, printing results to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { exp, train, seed } => {
            let mut cfg = exp.resolve()?;
            train.apply(&mut cfg);
            if let Some(seed) = seed {
                cfg.train.seed = seed;
            }
            let report = commands::train(&cfg)?;
            println!("{}", serde_json::to_string(&report).expect("serializable"));
        }
        Command::Eval { model, exp } => {
            print_reports(&commands::evaluate(&[model], &exp.resolve()?)?);
        }
        Command::Ensemble { models, exp } => {
            print_reports(&commands::evaluate(&models, &exp.resolve()?)?);
        }
        Command::Study {
            exp,
            train,
            sizes,
            seeds,
        } => {
            let mut cfg = exp.resolve()?;
            train.apply(&mut cfg);
            if !sizes.is_empty() {
                cfg.subsample_sizes = Some(sizes);
            }
            if !seeds.is_empty() {
                cfg.seeds = seeds;
            }
            let rows = commands::study(&cfg)?;
            for row in rows.iter().filter(|r| r.kind == commands::RowKind::Aggregate) {
                println!(
                    "{:<16} size {:>7}  EER {:6.2}% ± {:.2}  ECE {:6.2}% ± {:.2}",
                    row.eval_set,
                    row.size,
                    100.0 * row.eer,
                    100.0 * row.eer_std.unwrap_or(0.0),
                    100.0 * row.ece,
                    100.0 * row.ece_std.unwrap_or(0.0),
                );
            }
        }
        Command::ExtractCheck { files } => {
            for report in commands::extract_check(&files)? {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            }
        }
    }
    Ok(())
}

fn print_reports(reports: &[commands::DatasetReport]) {
    for r in reports {
        println!("{:<16} {}", r.dataset, r.metrics.summary());
    }
}
