//! Pipeline driver: synthesize | train | score | evaluate | baselines,
//! all configured by one TOML file and one seed. Failures exit nonzero
//! with a single machine-parsable line: `error[<category>]: <message>`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simetric::curriculum::{StageKind, StopReason};
use simetric::pipeline::{
    cmd_baselines, cmd_evaluate, cmd_score, cmd_synthesize, cmd_train, parse_stage, stage_slug,
    PipelineConfig,
};
use simetric::Result;

#[derive(Parser)]
#[command(
    name = "simetric",
    version,
    about = "Reference-free simplification metric: synthesis, training, scoring, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simplify sources, corrupt a seeded subset, write records + signals.
    Synthesize {
        /// Pipeline config (TOML)
        #[arg(long)]
        config: PathBuf,
    },
    /// Run curriculum stages, once per seed in seed..seed+num_runs.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated subset in curriculum order
        #[arg(long, value_delimiter = ',', default_value = "stage1,stage2,finetune")]
        stages: Vec<String>,
    },
    /// Score records with a fine-tuned checkpoint, preserving order.
    Score {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        records: PathBuf,
        /// Output path (default: <output_dir>/scores-<checkpoint>.jsonl)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlate one or more score files with human ratings.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Repeatable: one report per scores file
        #[arg(long = "scores", required = true)]
        scores: Vec<PathBuf>,
    },
    /// Write classical baseline score files (FKGL, self-similarity, BLEU, SARI).
    Baselines {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synthesize { config } => {
            let config = PipelineConfig::load(&config)?;
            let summary = cmd_synthesize(&config)?;
            println!(
                "synthesized {} records from {} sources ({} corrupted)",
                summary.records, summary.sources, summary.augmented
            );
            for warning in &summary.warnings {
                println!("warning: signal {warning} has zero variance on the train split");
            }
            println!("records: {}", summary.records_path.display());
            println!("signals: {}", summary.signals_path.display());
            println!("split:   {}", summary.split_path.display());
        }
        Command::Train { config, stages } => {
            let config = PipelineConfig::load(&config)?;
            let stages: Vec<StageKind> =
                stages.iter().map(|s| parse_stage(s)).collect::<Result<_>>()?;
            let summary = cmd_train(&config, &stages)?;
            for run in &summary.runs {
                for &stage in &stages {
                    let slug = stage_slug(stage);
                    let report = &run.reports[slug];
                    let stopped = match report.stop_reason {
                        StopReason::Patience => "patience",
                        StopReason::EpochCap => "epoch cap",
                    };
                    println!(
                        "seed {}: {} best dev loss {:.6} at eval {} ({} epochs, {}, {:.1}s)",
                        run.seed,
                        slug,
                        report.best_dev_loss,
                        report.best_eval,
                        report.epochs_run,
                        stopped,
                        report.wall_clock_secs,
                    );
                }
            }
            for (slug, aggregate) in &summary.aggregates {
                println!(
                    "{}: dev loss {:.6} \u{b1} {:.6} over {} run(s)",
                    slug,
                    aggregate.mean_best_dev_loss,
                    aggregate.spread,
                    summary.runs.len()
                );
            }
        }
        Command::Score {
            config,
            checkpoint,
            records,
            out,
        } => {
            let config = PipelineConfig::load(&config)?;
            let path = cmd_score(&config, &checkpoint, &records, out.as_deref())?;
            println!("scores: {}", path.display());
        }
        Command::Evaluate { config, scores } => {
            let config = PipelineConfig::load(&config)?;
            let reports = cmd_evaluate(&config, &scores)?;
            for (label, report) in &reports {
                println!("== {label} ==");
                print!("{}", report.render());
            }
        }
        Command::Baselines { config } => {
            let config = PipelineConfig::load(&config)?;
            for outcome in cmd_baselines(&config)? {
                match (&outcome.path, &outcome.notice) {
                    (Some(path), _) => println!("{}: {}", outcome.name, path.display()),
                    (None, Some(notice)) => println!("{notice}"),
                    (None, None) => {}
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error[{}]: {error}", error.category());
            ExitCode::FAILURE
        }
    }
}
