//! Command-line pipeline: `preprocess`, `train`, `evaluate` and `report`.

pub mod config;
mod evaluate;
mod output;
mod preprocess;
mod report;
mod train;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use totm_core::model::ModelKind;
use totm_core::Sentiment;

pub use config::RunConfig;
pub use evaluate::cmd_evaluate;
pub use preprocess::cmd_preprocess;
pub use report::cmd_report;
pub use train::cmd_train;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const MAX_SWEEPS: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "totm", version, about = "Aspect-based target-opinion topic modelling for tweets")]
pub struct Cli {
    /// TOML run configuration; omitted keys take the shipped defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for evaluation (0 = one per core).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub threads: usize,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "totm-out")]
    pub output: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn JSONL tweets into a split, vocabulary-encoded corpus snapshot.
    Preprocess(PreprocessArgs),
    /// Train a model on the training half of a corpus snapshot.
    Train(TrainArgs),
    /// Held-out perplexity, polarity classification and lexicon sentiment scores.
    Evaluate(EvaluateArgs),
    /// Qualitative tables from a trained model.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Tweets, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Emotion marker lists (overrides the configured file).
    #[arg(long, value_name = "FILE")]
    pub emotion_lexicon: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Totm,
    Ilda,
    Ldadp,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Totm => ModelKind::Totm,
            ModelArg::Ilda => ModelKind::Ilda,
            ModelArg::Ldadp => ModelKind::Ldadp,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus snapshot written by `preprocess`.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Model to train (overrides the configured kind).
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Sentiment lexicon, `word<TAB>score` (overrides the configured file).
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Overrides `sampler.max_sweeps`.
    #[arg(long, value_name = "N")]
    pub max_sweeps: Option<usize>,
    /// Continue from a model snapshot instead of initialising.
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model snapshot written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Corpus snapshot whose test half is evaluated.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Affinity lexicon, `word<TAB>pos<TAB>neg` (overrides the configured file).
    #[arg(long, value_name = "FILE")]
    pub affinity: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// List length (overrides `evaluate.top_k`).
    #[arg(long, value_name = "K")]
    pub top: Option<usize>,
    #[command(subcommand)]
    pub kind: ReportKind,
}

#[derive(Clone, Debug, PartialEq, Subcommand)]
pub enum ReportKind {
    /// Top targets of every live aspect and top opinions of every sentiment.
    Topics,
    /// Ranked positive and negative opinions about one target.
    Opinions {
        #[arg(long)]
        target: String,
    },
    /// Per-tag opinions about each aspect's main targets.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        tags: Vec<String>,
        /// Aspects to include (default: all live aspects).
        #[arg(long, num_args = 1..)]
        aspects: Vec<usize>,
    },
    /// Tweets expressing a sentiment about one target, most confident first.
    Contrast {
        #[arg(long)]
        target: String,
        #[arg(long, value_parser = parse_sentiment, allow_hyphen_values = true)]
        sentiment: Sentiment,
    },
    /// Pairwise Hellinger distances between aspect target distributions.
    Heatmap,
}

fn parse_sentiment(s: &str) -> Result<Sentiment, String> {
    s.parse()
}

/// How a successful command ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Converged,
    MaxSweeps,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done | Outcome::Converged => exit::OK,
            Outcome::MaxSweeps => exit::MAX_SWEEPS,
        }
    }
}

/// The configuration file (or defaults) with the global `--seed` applied.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

pub fn run(cli: Cli) -> Result<Outcome> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let mut config = load_config(&cli)?;
    std::fs::create_dir_all(&cli.output).with_context(|| format!("cannot create {}", cli.output.display()))?;
    match cli.command {
        Command::Preprocess(args) => {
            if let Some(path) = args.emotion_lexicon {
                config.preprocess.emotion_lexicon = Some(path);
            }
            cmd_preprocess(&args.input, &config, &cli.output)?;
            Ok(Outcome::Done)
        }
        Command::Train(args) => {
            if let Some(m) = args.model {
                config.model.kind = m.into();
            }
            if let Some(path) = args.lexicon {
                config.model.lexicon = Some(path);
            }
            if let Some(n) = args.max_sweeps {
                config.sampler.max_sweeps = n;
            }
            config.validate()?;
            cmd_train(&args.corpus, args.resume.as_deref(), &config, &cli.output)
        }
        Command::Evaluate(args) => {
            if let Some(path) = args.affinity {
                config.evaluate.affinity_lexicon = Some(path);
            }
            cmd_evaluate(&args.model, &args.corpus, &config, &cli.output)?;
            Ok(Outcome::Done)
        }
        Command::Report(args) => {
            if let Some(k) = args.top {
                config.evaluate.top_k = k;
            }
            cmd_report(&args.model, &args.corpus, &args.kind, &config, &cli.output)?;
            Ok(Outcome::Done)
        }
    }
}
