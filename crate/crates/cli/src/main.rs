//! `supportive`: the weak-supervision pipeline from a TOML config.

mod artifacts;
mod commands;
mod config;
mod error;
mod fixture;

use std::io::{stdin, stdout, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use supportive::linear::TextClassifier;
use supportive::scorer::serve::{StubScore, StubServer};

use commands::Ctx;
use config::Loaded;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "supportive",
    version,
    about = "Weak supervision pipeline for supportive posts"
)]
struct Cli {
    /// Pipeline config file.
    #[arg(long, global = true, default_value = "pipeline.toml")]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps worker threads and external scorer processes.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load the corpus and record country evidence.
    Ingest,
    /// Split posts by hashtag polarity.
    Partition,
    /// Train the built-in scorers from their labeled files.
    TrainScorer {
        #[arg(long)]
        name: Option<String>,
    },
    /// Score every eligible post with every scorer.
    Score,
    /// Draw the evaluation sample and a blank annotation sheet.
    SampleEval,
    /// Fill the annotation sheet from a ground-truth file.
    SimulateAnnotation,
    /// Inter-annotator agreement and majority gold labels.
    Kappa,
    /// Write a sheet of unresolved items, or merge one back with --revisions.
    Adjudicate {
        #[arg(long)]
        revisions: Option<PathBuf>,
    },
    /// Informed weakly labeled training set.
    BuildInformed,
    /// Hashtag-only training set of the same size.
    BuildHashtagBaseline,
    /// Pairwise discriminability rate of every scorer.
    PairRate,
    /// Repeated train and evaluate runs.
    Experiment {
        /// One of supervised, informed, hashtag.
        #[arg(long)]
        model: Option<String>,
    },
    /// Engagement, hashtag count and overlap tables.
    Engagement,
    /// Term frequencies per side.
    Termfreq,
    /// Every stage in order.
    Pipeline,
    /// Re-hash the output directory against its manifest.
    Verify,
    /// Write a synthetic corpus and config.
    Fixture {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 5000)]
        tweets: usize,
    },
    /// Serve a model over the scorer protocol on stdin and stdout.
    ServeScorer {
        #[arg(long, default_value = "scorer")]
        name: String,
        #[arg(long, conflicts_with = "p")]
        model: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
    },
}

fn load(cli: &Cli) -> Result<Loaded, CliError> {
    let mut cfg = Loaded::read(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.override_seed(s);
    }
    if let Some(o) = &cli.out {
        cfg.override_output(o.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.cmd {
        Cmd::Fixture { dir, tweets } => {
            return fixture::write_fixture(dir, *tweets, cli.seed.unwrap_or(0))
        }
        Cmd::ServeScorer { name, model, p } => {
            let score = match (model, p) {
                (Some(m), _) => StubScore::Model(Box::new(TextClassifier::load(m)?)),
                (None, Some(p)) => StubScore::Constant(*p),
                (None, None) => {
                    return Err(CliError::Config("serve-scorer needs --model or --p".into()))
                }
            };
            return StubServer::new(name, score)
                .serve(stdin().lock(), BufWriter::new(stdout().lock()))
                .map_err(|e| CliError::Data(format!("scorer i/o: {e}")));
        }
        Cmd::Verify => {
            let root = match &cli.out {
                Some(o) => o.clone(),
                None => load(&cli)?.output_dir(),
            };
            let d = artifacts::verify(&root)?;
            if d.is_clean() {
                eprintln!("{}: all files match the manifest", root.display());
                return Ok(());
            }
            return Err(CliError::Data(format!(
                "output drifted: changed [{}], missing [{}], untracked [{}]",
                d.changed.join(", "),
                d.missing.join(", "),
                d.untracked.join(", ")
            )));
        }
        _ => {}
    }
    let ctx = Ctx::new(load(&cli)?, cli.jobs)?;
    match &cli.cmd {
        Cmd::Ingest => commands::ingest(&ctx)?,
        Cmd::Partition => commands::partition_cmd(&ctx)?,
        Cmd::TrainScorer { name } => commands::train_scorer(&ctx, name.as_deref())?,
        Cmd::Score => commands::score(&ctx)?,
        Cmd::SampleEval => commands::sample_eval(&ctx)?,
        Cmd::SimulateAnnotation => commands::simulate_annotation(&ctx)?,
        Cmd::Kappa => commands::kappa(&ctx)?,
        Cmd::Adjudicate { revisions } => commands::adjudicate(&ctx, revisions.as_deref())?,
        Cmd::BuildInformed => commands::informed(&ctx)?,
        Cmd::BuildHashtagBaseline => commands::hashtag_baseline(&ctx)?,
        Cmd::PairRate => commands::pair_rate(&ctx)?,
        Cmd::Experiment { model } => commands::experiment(&ctx, model.as_deref())?,
        Cmd::Engagement => commands::engagement(&ctx)?,
        Cmd::Termfreq => commands::termfreq(&ctx)?,
        Cmd::Pipeline => commands::pipeline(&ctx)?,
        Cmd::Verify | Cmd::Fixture { .. } | Cmd::ServeScorer { .. } => {
            unreachable!("handled above")
        }
    }
    ctx.manifest()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
