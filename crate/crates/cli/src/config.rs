use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use guandan_core::agents::{AgentConfig, AgentKind};
use guandan_core::pipeline::PipelineConfig;
use guandan_core::TributeMode;
use serde::Deserialize;

use crate::args::PipelineArgs;
use crate::CliError;

/// Settings read from `--config`. Every field is optional; flags and
/// environment variables take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub simulate: SimulateFile,
    pub ingest: IngestFile,
    pub pipeline: PipelineFile,
    pub eval: EvalFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateFile {
    pub games: Option<u32>,
    pub agents: Option<String>,
    pub tribute_mode: Option<String>,
    pub max_games: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestFile {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub chunk: Option<usize>,
    pub overlap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineFile {
    pub index: Option<PathBuf>,
    pub tom_order: Option<u8>,
    pub rag: Option<bool>,
    pub threshold: Option<f64>,
    pub top_k: Option<usize>,
    pub search: Option<String>,
    pub history_window: Option<usize>,
    pub language: Option<String>,
    pub templates: Option<PathBuf>,
    pub mode: Option<String>,
    pub stride: Option<usize>,
    pub record_prompts: Option<bool>,
    pub tribute_mode: Option<String>,
    pub backend: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub token_env: Option<String>,
    pub mock_table: Option<PathBuf>,
    pub timeout_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub backoff_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalFile {
    pub references: Option<PathBuf>,
    pub replay: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

pub fn parse<T: FromStr>(what: &str, value: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    value.parse().map_err(|e| CliError::Config(format!("--{what}: {e}")))
}

/// Resolved pipeline settings plus the paths the pipeline loads.
pub struct PipelineSetup {
    pub config: PipelineConfig,
    pub index: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

pub fn pipeline(args: &PipelineArgs, file: &PipelineFile) -> Result<PipelineSetup, CliError> {
    let mut c = PipelineConfig::default();
    if let Some(v) = args.tom_order.or(file.tom_order) {
        c.tom_order = v;
    }
    if let Some(v) = args.rag.or(file.rag) {
        c.rag = v;
    }
    if let Some(v) = args.threshold.or(file.threshold) {
        c.threshold = v;
    }
    if let Some(v) = args.top_k.or(file.top_k) {
        c.top_k = v;
    }
    if let Some(v) = args.search.as_ref().or(file.search.as_ref()) {
        c.search = parse("search", v)?;
    }
    if let Some(v) = args.history_window.or(file.history_window) {
        c.history_window = v;
    }
    if let Some(v) = args.language.as_ref().or(file.language.as_ref()) {
        c.language = parse("language", v)?;
    }
    if let Some(v) = args.mode.as_ref().or(file.mode.as_ref()) {
        c.mode = parse("mode", v)?;
    }
    if let Some(v) = args.stride.or(file.stride) {
        c.stride = v;
    }
    if let Some(v) = args.record_prompts.or(file.record_prompts) {
        c.record_prompts = v;
    }
    if let Some(v) = args.tribute_mode.as_ref().or(file.tribute_mode.as_ref()) {
        c.engine.tribute_mode = parse::<TributeMode>("tribute-mode", v)?;
    }
    let b = &mut c.backend;
    if let Some(v) = args.backend.as_ref().or(file.backend.as_ref()) {
        b.kind = parse("backend", v)?;
    }
    if let Some(v) = args.endpoint.as_ref().or(file.endpoint.as_ref()) {
        b.endpoint = Some(v.clone());
    }
    if let Some(v) = args.model.as_ref().or(file.model.as_ref()) {
        b.model = v.clone();
    }
    if let Some(v) = args.token_env.as_ref().or(file.token_env.as_ref()) {
        b.token_env = Some(v.clone());
    }
    if let Some(v) = args.timeout_ms.or(file.timeout_ms) {
        b.timeout_ms = v;
    }
    if let Some(v) = args.max_retries.or(file.max_retries) {
        b.max_retries = v;
    }
    if let Some(v) = file.backoff_ms {
        b.backoff_ms = v;
    }
    if let Some(path) = args.mock_table.as_ref().or(file.mock_table.as_ref()) {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("mock table {}: {e}", path.display())))?;
        b.mock_table = serde_json::from_str::<BTreeMap<String, String>>(&text)
            .map_err(|e| CliError::Config(format!("mock table {}: {e}", path.display())))?;
    }
    c.validate().map_err(|e| CliError::Config(e.to_string()))?;
    c.backend.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(PipelineSetup {
        config: c,
        index: args.index.clone().or_else(|| file.index.clone()),
        templates: args.templates.clone().or_else(|| file.templates.clone()),
    })
}

/// `greedy`, `greedyx4`, `greedy×4`, or four comma-separated entries, each
/// `random`, `greedy` or `replay:PATH`.
pub fn agents(spec: &str, seed: u64) -> Result<[AgentConfig; 4], CliError> {
    let spec = spec.trim();
    let one = spec.strip_suffix("×4").or_else(|| spec.strip_suffix("x4"));
    let parts: Vec<&str> = match one {
        Some(kind) => vec![kind; 4],
        None if !spec.contains(',') => vec![spec; 4],
        None => spec.split(',').map(str::trim).collect(),
    };
    if parts.len() != 4 {
        return Err(CliError::Config(format!("--agents: expected 1 or 4 entries, got {}", parts.len())));
    }
    let mut out = Vec::with_capacity(4);
    for p in parts {
        let (kind, path) = match p.split_once(':') {
            Some((k, path)) => (k, Some(PathBuf::from(path))),
            None => (p, None),
        };
        let kind: AgentKind = parse("agents", kind)?;
        if kind == AgentKind::Replay && path.is_none() {
            return Err(CliError::Config("--agents: replay needs a path, as replay:PATH".into()));
        }
        out.push(AgentConfig { kind, seed, replay_path: path });
    }
    Ok(out.try_into().expect("four agents"))
}
