use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "guandan", version, about = "Guandan match simulator and commentary toolkit")]
pub struct Cli {
    /// JSON config file; flags override environment variables, which override the file.
    #[arg(long, global = true, env = "GUANDAN_CONFIG")]
    pub config: Option<PathBuf>,

    /// Base random seed.
    #[arg(long, global = true, env = "GUANDAN_SEED")]
    pub seed: Option<u64>,

    /// Worker threads for independent matches or configurations (default: logical cores).
    #[arg(long, global = true, env = "GUANDAN_JOBS")]
    pub jobs: Option<usize>,

    /// Log filter such as `info` or `debug`; logs go to stderr.
    #[arg(long, global = true, env = "GUANDAN_LOG", default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play seeded matches and write replay logs plus a summary.
    Simulate(SimulateArgs),
    /// Build a style index from a corpus directory or JSONL file.
    Ingest(IngestArgs),
    /// Generate commentary records for a replay log.
    Commentate(CommentateArgs),
    /// Score generated commentary against references, or run the ablation grid.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of matches, seeded `seed`, `seed + 1`, ...
    #[arg(long, env = "GUANDAN_GAMES")]
    pub games: Option<u32>,

    /// One agent for all seats or four comma-separated agents: random, greedy, replay:PATH.
    /// `KIND×4` and `KINDx4` are accepted.
    #[arg(long, env = "GUANDAN_AGENTS")]
    pub agents: Option<String>,

    /// Tribute card rule: standard or double.
    #[arg(long, env = "GUANDAN_TRIBUTE_MODE")]
    pub tribute_mode: Option<String>,

    /// Games per match before it is cut off.
    #[arg(long, env = "GUANDAN_MAX_GAMES")]
    pub max_games: Option<u32>,

    /// Replay output: a file for one match, otherwise a directory of `match-SEED.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Summary JSON path (default: stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of .txt files or a JSONL file of {id, text}.
    #[arg(long, env = "GUANDAN_CORPUS")]
    pub corpus: Option<PathBuf>,

    /// Output index JSON.
    #[arg(long, env = "GUANDAN_INDEX")]
    pub index: Option<PathBuf>,

    /// Maximum units per node.
    #[arg(long)]
    pub chunk: Option<usize>,

    /// Units shared by consecutive nodes.
    #[arg(long)]
    pub overlap: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PipelineArgs {
    /// Style index built by `ingest`.
    #[arg(long, env = "GUANDAN_INDEX")]
    pub index: Option<PathBuf>,

    /// Theory-of-mind order: 0 (off), 1 or 2.
    #[arg(long, env = "GUANDAN_TOM_ORDER")]
    pub tom_order: Option<u8>,

    /// Enable style retrieval (`--rag false` disables it).
    #[arg(long, env = "GUANDAN_RAG", num_args = 0..=1, default_missing_value = "true")]
    pub rag: Option<bool>,

    /// Cosine threshold in [0, 1].
    #[arg(long, env = "GUANDAN_THRESHOLD")]
    pub threshold: Option<f64>,

    /// Retrieved snippets kept after filtering.
    #[arg(long, env = "GUANDAN_TOP_K")]
    pub top_k: Option<usize>,

    /// Retrieval search: tree or flat.
    #[arg(long, env = "GUANDAN_SEARCH")]
    pub search: Option<String>,

    /// History events shown to the guider.
    #[arg(long, env = "GUANDAN_HISTORY_WINDOW")]
    pub history_window: Option<usize>,

    /// Output language: zh or en.
    #[arg(long, env = "GUANDAN_LANGUAGE")]
    pub language: Option<String>,

    /// Directory with `<lang>/` template overrides.
    #[arg(long, env = "GUANDAN_TEMPLATES")]
    pub templates: Option<PathBuf>,

    /// Generation mode: template or llm.
    #[arg(long, env = "GUANDAN_MODE")]
    pub mode: Option<String>,

    /// Comment on every N-th play.
    #[arg(long, env = "GUANDAN_STRIDE")]
    pub stride: Option<usize>,

    /// Keep full prompts in provenance.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub record_prompts: Option<bool>,

    /// Tribute card rule used when replaying: standard or double.
    #[arg(long, env = "GUANDAN_TRIBUTE_MODE")]
    pub tribute_mode: Option<String>,

    /// Backend for llm mode: http or mock.
    #[arg(long, env = "GUANDAN_BACKEND")]
    pub backend: Option<String>,

    /// Base URL of an OpenAI-compatible endpoint.
    #[arg(long, env = "GUANDAN_ENDPOINT")]
    pub endpoint: Option<String>,

    /// Model name sent to the backend.
    #[arg(long, env = "GUANDAN_MODEL")]
    pub model: Option<String>,

    /// Name of the environment variable holding the API token.
    #[arg(long, env = "GUANDAN_TOKEN_ENV")]
    pub token_env: Option<String>,

    /// JSON object mapping prompt digests to canned mock completions.
    #[arg(long, env = "GUANDAN_MOCK_TABLE")]
    pub mock_table: Option<PathBuf>,

    #[arg(long, env = "GUANDAN_TIMEOUT_MS")]
    pub timeout_ms: Option<u64>,

    #[arg(long, env = "GUANDAN_MAX_RETRIES")]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CommentateArgs {
    /// Replay log written by `simulate`.
    #[arg(long, env = "GUANDAN_REPLAY")]
    pub replay: Option<PathBuf>,

    /// Output JSONL (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Generated texts as `[LABEL=]PATH`, JSONL of {id, text} or commentary records; repeatable.
    #[arg(long)]
    pub generated: Vec<String>,

    /// Reference texts, JSONL of {id, text}.
    #[arg(long, env = "GUANDAN_REFERENCES")]
    pub references: Option<PathBuf>,

    /// Run the five-configuration ablation over `--replay` instead.
    #[arg(long)]
    pub ablation: bool,

    /// Replay log for `--ablation`.
    #[arg(long, env = "GUANDAN_REPLAY")]
    pub replay: Option<PathBuf>,

    /// Report format: csv, json or table.
    #[arg(long, env = "GUANDAN_FORMAT")]
    pub format: Option<String>,

    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}
