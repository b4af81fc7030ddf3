//! `xalign` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xalign_core::instructgen::Objective;

#[derive(Parser)]
#[command(
    name = "xalign",
    version,
    about = "Cross-lingual in-context learning and instruction-alignment toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instruction-alignment samples from a parallel corpus.
    GenInstruct(GenInstructArgs),
    /// Interleave replayed old samples with new ones into training batches.
    PlanReplay(PlanReplayArgs),
    /// Show the exemplars and alignment pairs retrieved for each query.
    Retrieve(RetrieveArgs),
    /// Run an evaluation described by a config file and write a metric report.
    Evaluate(EvaluateArgs),
    /// Word-level cross-lingual retrieval accuracy@k over a bilingual lexicon.
    AlignQuality(AlignQualityArgs),
    /// Per-language weighted-F1 deltas between two reports.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct GenInstructArgs {
    /// Parallel corpus (JSONL or TSV).
    #[arg(long)]
    pub parallel: PathBuf,
    /// Comma-separated objectives: tlm, mt, xss, mlm.
    #[arg(long, value_delimiter = ',', default_value = "tlm,mt,xss,mlm")]
    pub objectives: Vec<Objective>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Use one template index for every sample instead of cycling.
    #[arg(long)]
    pub template: Option<usize>,
    #[arg(long, default_value_t = xalign_core::instructgen::DEFAULT_MASK_RATIO)]
    pub mask_ratio: f64,
    #[arg(long, default_value = xalign_core::instructgen::DEFAULT_MASK_TOKEN)]
    pub mask_token: String,
    #[arg(long, default_value_t = 1)]
    pub tlm_repeats: usize,
}

#[derive(Args)]
pub struct PlanReplayArgs {
    /// Earlier training data (JSONL, one record per line).
    #[arg(long)]
    pub old: Option<PathBuf>,
    /// New training data (JSONL).
    #[arg(long)]
    pub new: PathBuf,
    /// Number of old records to replay.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long)]
    pub batch_size: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Emit new-only batches.
    #[arg(long)]
    pub no_replay: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Only this query.
    #[arg(long)]
    pub query_id: Option<String>,
    /// Write JSONL here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the first assembled prompt and exit without scoring.
    #[arg(long)]
    pub dry_run: bool,
    /// Record every scorer call into a fixture file for offline replay.
    #[arg(long)]
    pub record_fixture: Option<PathBuf>,
    /// Also write per-query predictions as JSONL.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_inflight: Option<usize>,
}

#[derive(Args)]
pub struct AlignQualityArgs {
    /// Tab-separated lexicon with a `#src=..\ttgt=..` header.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// JSONL word vectors keyed `<lang>:<word>`; omit to use XALIGN_EMBED_URL.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Allow several translations per source word.
    #[arg(long)]
    pub multi_sense: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub treatment: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenInstruct(a) => commands::gen_instruct(a),
        Command::PlanReplay(a) => commands::plan_replay(a),
        Command::Retrieve(a) => commands::retrieve(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::AlignQuality(a) => commands::align_quality(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err
                .chain()
                .filter_map(|e| e.downcast_ref::<xalign_core::Error>())
                .any(xalign_core::Error::is_usage);
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
