use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use popdisc_core::promptkit::{OptionOrder, PromptSetting};
use popdisc_core::stats::TTestVariant;

mod analyze;
mod commands;
mod config;
mod error;
mod model;
mod plot;

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "popdisc", version, about = "Populist discourse coding, scoring and statistics for speech corpora")]
struct Cli {
    /// TOML run configuration; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read a JSONL corpus, validate it and write normalized sentence JSONL
    Ingest(IngestArgs),
    /// Label distribution, scoring-filter counts and annotator agreement
    Stats(StatsArgs),
    /// Train the TF-IDF SVM or distribution-random baseline
    TrainBaseline(TrainArgs),
    /// Predict labels for a corpus with a trained baseline
    Predict(PredictArgs),
    /// Validate external predictions against a corpus and normalize them
    ImportPredictions(ImportArgs),
    /// Per-class and macro F1 of predictions against a gold corpus
    Evaluate(EvaluateArgs),
    /// Speech-level PDI, WPDI and populist volume table
    Score(ScoreArgs),
    /// Grouped significance tests over a score table
    Analyze(AnalyzeArgs),
    /// SVG charts from a score table
    Plot(PlotArgs),
    /// Emit classification prompts for external LLM runs
    Prompts(PromptArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Sentences,
    Raw,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Input JSONL file
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemaArg::Sentences)]
    pub schema: SchemaArg,
    /// Normalized sentence JSONL output (stdout if omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Sentence JSONL corpus
    pub corpus: Option<PathBuf>,
    /// Annotator label files (prediction JSONL); two or more enable agreement
    #[arg(long = "annotator")]
    pub annotators: Vec<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Svm,
    DistRandom,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Held-out corpus to evaluate on
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BaselineArg::Svm)]
    pub baseline: BaselineArg,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Evaluation CSV (stdout if omitted and no output_dir)
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Balanced per-class loss weights
    #[arg(long)]
    pub balanced: bool,
    #[arg(long)]
    pub min_df: Option<usize>,
    #[arg(long)]
    pub max_df: Option<f64>,
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Dist-random: number of seeds to average over
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    /// Dist-random: sample AE and PC as independent coins
    #[arg(long)]
    pub independent: bool,
    /// Write the top-k weighted n-grams per class
    #[arg(long)]
    pub top_features: Option<usize>,
    #[arg(long)]
    pub top_features_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Gold corpus (any sentence JSONL with labels)
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Prediction JSONL; gold labels are scored when omitted
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub full_boost: Option<f64>,
    #[arg(long)]
    pub adjacency_multiplier: Option<f64>,
    /// Let fully populist sentences join adjacency pairs
    #[arg(long)]
    pub pair_fully_populist: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Grouping {
    Campaign,
    SwingBallotpedia,
    SwingAttention,
    Bins,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Pdi,
    Wpdi,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub grouping: Grouping,
    #[arg(long, value_enum, default_value_t = Metric::Pdi)]
    pub metric: Metric,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t_test: Option<TTestVariant>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Stats CSV from `analyze --grouping bins`, for significance stars
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Pdi)]
    pub metric: Metric,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PromptArgs {
    /// Target sentences
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Training corpus for K-shot and RAG-shot demonstrations
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Baseline bundle whose TF-IDF model is reused for retrieval
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub setting: Option<PromptSetting>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub context_window: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub option_order: Option<OptionOrder>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the gold answer key
    #[arg(long)]
    pub answer_key: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Ingest(a) => commands::ingest(&cfg, a),
        Command::Stats(a) => commands::stats(&cfg, a),
        Command::TrainBaseline(a) => commands::train_baseline(&cfg, a),
        Command::Predict(a) => commands::predict(&cfg, a),
        Command::ImportPredictions(a) => commands::import_predictions(&cfg, a),
        Command::Evaluate(a) => commands::evaluate(&cfg, a),
        Command::Score(a) => commands::score(&cfg, a),
        Command::Analyze(a) => analyze::run(&cfg, a),
        Command::Plot(a) => plot::run(&cfg, a),
        Command::Prompts(a) => commands::prompts(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::input("usage", first));
            return ExitCode::from(error::EXIT_INPUT as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(cli)));
    let err = match outcome {
        Ok(Ok(())) => return ExitCode::SUCCESS,
        Ok(Err(e)) => e,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            CliError::internal("panic", msg)
        }
    };
    eprintln!("{err}");
    ExitCode::from(err.exit_code() as u8)
}
