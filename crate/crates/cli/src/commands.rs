use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use guandan_core::agents::{make_agent, Agent};
use guandan_core::engine::{read_log, write_log};
use guandan_core::metrics::{evaluate_run, original_row, EvalReport, NaiveBayes, SystemOutput};
use guandan_core::pipeline::{ablation_grid, ablation_report, CommentaryRecord, Commentator, PipelineError};
use guandan_core::retrieval::{load_corpus, ChunkConfig, StyleIndex};
use guandan_core::sim::{play_match, MatchSummary, SimConfig};
use guandan_core::templates::Templates;
use guandan_core::{Event, Seat, TributeMode};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{CommentateArgs, EvalArgs, IngestArgs, SimulateArgs};
use crate::config::{self, FileConfig, PipelineSetup};
use crate::CliError;

const DEFAULT_AGENTS: &str = "random";

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(runtime)
        }
    }
}

fn existing(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    let path = path.ok_or_else(|| CliError::Config(format!("--{flag} is required")))?;
    if !path.exists() {
        return Err(CliError::Config(format!("--{flag}: {} does not exist", path.display())));
    }
    Ok(path)
}

fn load_events(path: &Path) -> Result<Vec<Event>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    read_log(BufReader::new(file)).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

#[derive(Debug, Default, Serialize)]
struct SimulationReport {
    seed: u64,
    matches: usize,
    games: u64,
    actions: u64,
    truncated: usize,
    wins: BTreeMap<String, usize>,
    /// Finish order `a-b-c-d` to the number of games that ended that way.
    finish_orders: BTreeMap<String, usize>,
    /// Final level per team to the number of matches.
    final_levels: [BTreeMap<String, usize>; 2],
    tributes: u64,
    anti_tributes: u64,
    per_match: Vec<MatchLine>,
}

#[derive(Debug, Serialize)]
struct MatchLine {
    seed: u64,
    games: u32,
    winner: Option<String>,
    truncated: bool,
    tributes: u32,
    anti_tributes: u32,
}

impl SimulationReport {
    fn add(&mut self, seed: u64, s: &MatchSummary) {
        self.matches += 1;
        self.games += u64::from(s.games);
        self.actions += s.actions;
        self.truncated += usize::from(s.truncated);
        let winner = s.winner.map(|t| format!("team{t}"));
        *self.wins.entry(winner.clone().unwrap_or_else(|| "none".into())).or_default() += 1;
        for order in &s.finish_orders {
            let key = order.iter().map(|seat| seat.to_string()).collect::<Vec<_>>().join("-");
            *self.finish_orders.entry(key).or_default() += 1;
        }
        if let Some(last) = s.levels.last() {
            for (t, level) in last.iter().enumerate() {
                *self.final_levels[t].entry(level.to_string()).or_default() += 1;
            }
        }
        self.tributes += u64::from(s.tributes);
        self.anti_tributes += u64::from(s.anti_tributes);
        self.per_match.push(MatchLine {
            seed,
            games: s.games,
            winner,
            truncated: s.truncated,
            tributes: s.tributes,
            anti_tributes: s.anti_tributes,
        });
    }
}

pub fn simulate(args: SimulateArgs, file: &FileConfig, seed: u64) -> Result<(), CliError> {
    let f = &file.simulate;
    let games = args.games.or(f.games).unwrap_or(1);
    if games == 0 {
        return Err(CliError::Config("--games must be at least 1".into()));
    }
    let spec = args.agents.or_else(|| f.agents.clone()).unwrap_or_else(|| DEFAULT_AGENTS.into());
    config::agents(&spec, seed)?;
    let mut sim = SimConfig::default();
    if let Some(m) = args.tribute_mode.as_ref().or(f.tribute_mode.as_ref()) {
        sim.engine.tribute_mode = config::parse::<TributeMode>("tribute-mode", m)?;
    }
    if let Some(m) = args.max_games.or(f.max_games) {
        if m == 0 {
            return Err(CliError::Config("--max-games must be at least 1".into()));
        }
        sim.max_games = m;
    }
    if let Some(dir) = args.out.as_ref().filter(|_| games > 1) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }

    let seeds: Vec<u64> = (0..u64::from(games)).map(|i| seed.wrapping_add(i)).collect();
    let results: Vec<(u64, MatchSummary)> = seeds
        .par_iter()
        .map(|&s| {
            let configs = config::agents(&spec, s)?;
            let mut built: Vec<Box<dyn Agent>> = Vec::with_capacity(4);
            for (c, seat) in configs.iter().zip(Seat::ALL) {
                built.push(make_agent(c, seat).map_err(|e| CliError::Config(e.to_string()))?);
            }
            let Ok(mut agents) = <[Box<dyn Agent>; 4]>::try_from(built) else { unreachable!("four seats") };
            let (state, summary) = play_match(s, &mut agents, &sim).map_err(|e| runtime(format!("match {s}: {e}")))?;
            if let Some(out) = &args.out {
                let path = if games == 1 { out.clone() } else { out.join(format!("match-{s}.jsonl")) };
                let mut w = create(&path)?;
                write_log(&mut w, state.history()).and_then(|_| w.flush()).map_err(runtime)?;
            }
            info!("match {s}: {} games, winner {:?}", summary.games, summary.winner);
            Ok((s, summary))
        })
        .collect::<Result<_, CliError>>()?;

    let mut report = SimulationReport { seed, ..Default::default() };
    for (s, summary) in &results {
        report.add(*s, summary);
    }
    let text = serde_json::to_string_pretty(&report).map_err(runtime)? + "\n";
    emit(args.summary.as_deref(), &text)
}

pub fn ingest(args: IngestArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.ingest;
    let corpus = existing(args.corpus.or_else(|| f.corpus.clone()), "corpus")?;
    let index = args.index.or_else(|| f.index.clone()).ok_or_else(|| CliError::Config("--index is required".into()))?;
    let mut chunking = ChunkConfig::default();
    if let Some(n) = args.chunk.or(f.chunk) {
        chunking.max_units = n;
    }
    if let Some(n) = args.overlap.or(f.overlap) {
        chunking.overlap = n;
    }
    if chunking.max_units <= chunking.overlap {
        return Err(CliError::Config(format!(
            "--chunk ({}) must exceed --overlap ({})",
            chunking.max_units, chunking.overlap
        )));
    }
    let (docs, errors) = load_corpus(&corpus).map_err(runtime)?;
    for e in &errors {
        warn!("skipped document: {e}");
    }
    let built = StyleIndex::build(&docs, chunking).map_err(runtime)?;
    if built.is_empty() {
        warn!("corpus {} produced no nodes; the index is empty", corpus.display());
    }
    built.save(&index).map_err(runtime)?;
    println!(
        "documents: {}, skipped: {}, nodes: {}, buckets: {}",
        docs.len(),
        errors.len(),
        built.len(),
        built.buckets.len()
    );
    Ok(())
}

fn load_index(setup: &PipelineSetup, needed: bool) -> Result<Option<StyleIndex>, CliError> {
    if !needed {
        return Ok(None);
    }
    let path =
        setup.index.as_ref().ok_or_else(|| CliError::Config("retrieval is enabled but no --index was given".into()))?;
    if !path.exists() {
        return Err(CliError::Config(format!("--index: {} does not exist", path.display())));
    }
    let index = StyleIndex::load(path).map_err(|e| CliError::Config(e.to_string()))?;
    if index.is_empty() {
        return Err(CliError::Config(format!("--index: {} has no nodes", path.display())));
    }
    Ok(Some(index))
}

fn templates(setup: &PipelineSetup) -> Result<Templates, CliError> {
    let language = setup.config.language;
    match &setup.templates {
        Some(dir) => Templates::load_dir(dir, language).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(Templates::builtin(language)),
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Config(_) => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

pub fn commentate(args: CommentateArgs, file: &FileConfig) -> Result<(), CliError> {
    let replay = existing(args.replay.or_else(|| file.eval.replay.clone()), "replay")?;
    let setup = config::pipeline(&args.pipeline, &file.pipeline)?;
    let index = load_index(&setup, setup.config.rag)?;
    let commentator =
        Commentator::new(setup.config.clone(), templates(&setup)?, index.as_ref()).map_err(pipeline_error)?;
    let events = load_events(&replay)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let n = commentator
        .commentate_match(&events, &mut |record| {
            serde_json::to_writer(&mut out, &record).map_err(|e| e.to_string())?;
            out.write_all(b"\n").map_err(|e| e.to_string())
        })
        .map_err(pipeline_error)?;
    out.flush().map_err(runtime)?;
    info!("wrote {n} records as {}", setup.config.label());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TextLine {
    id: String,
    text: String,
}

/// `{id, text}` lines or commentary records, in file order.
fn load_texts(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1));
        let value: serde_json::Value = serde_json::from_str(&line).map_err(bad)?;
        let (id, text) = if value.get("final_text").is_some() {
            let r: CommentaryRecord = serde_json::from_value(value).map_err(bad)?;
            (r.id(), r.final_text)
        } else {
            let t: TextLine = serde_json::from_value(value).map_err(bad)?;
            (t.id, t.text)
        };
        if !seen.insert(id.clone()) {
            return Err(CliError::Config(format!("{}:{}: duplicate id `{id}`", path.display(), i + 1)));
        }
        out.push((id, text));
    }
    Ok(out)
}

/// Orders `generated` by the reference ids; both id sets must agree.
fn align(
    label: &str,
    generated: Vec<(String, String)>,
    references: &[(String, String)],
) -> Result<Vec<String>, CliError> {
    if references.is_empty() {
        return Ok(generated.into_iter().map(|(_, t)| t).collect());
    }
    let mut by_id: BTreeMap<String, String> = generated.into_iter().collect();
    let missing: Vec<&str> =
        references.iter().map(|(id, _)| id.as_str()).filter(|id| !by_id.contains_key(*id)).collect();
    let ref_ids: BTreeSet<&str> = references.iter().map(|(id, _)| id.as_str()).collect();
    let extra: Vec<&str> = by_id.keys().map(String::as_str).filter(|id| !ref_ids.contains(id)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = format!("{label}: generated and reference ids differ");
        if !missing.is_empty() {
            msg += &format!("; missing from generated: {}", missing.join(", "));
        }
        if !extra.is_empty() {
            msg += &format!("; not in references: {}", extra.join(", "));
        }
        return Err(CliError::Config(msg));
    }
    Ok(references.iter().map(|(id, _)| by_id.remove(id).expect("checked")).collect())
}

fn render(report: &EvalReport, format: &str) -> Result<String, CliError> {
    match format {
        "csv" => Ok(report.to_csv()),
        "json" => Ok(report.to_json()),
        "table" => Ok(report.to_table()),
        _ => Err(CliError::Config(format!("--format: unknown format `{format}` (expected csv, json or table)"))),
    }
}

pub fn eval(args: EvalArgs, file: &FileConfig) -> Result<(), CliError> {
    let format = args.format.or_else(|| file.eval.format.clone()).unwrap_or_else(|| "csv".into());
    render(&EvalReport { rows: Vec::new() }, &format)?;
    let references = match args.references.or_else(|| file.eval.references.clone()) {
        Some(p) => load_texts(&existing(Some(p), "references")?)?,
        None => Vec::new(),
    };
    let ref_texts: Vec<String> = references.iter().map(|(_, t)| t.clone()).collect();

    let report = if args.ablation {
        if !args.generated.is_empty() {
            return Err(CliError::Config("--generated cannot be combined with --ablation".into()));
        }
        let replay = existing(args.replay.or_else(|| file.eval.replay.clone()), "replay")?;
        let mut pipeline_args = args.pipeline.clone();
        pipeline_args.rag = None;
        pipeline_args.tom_order = None;
        let setup = config::pipeline(&pipeline_args, &file.pipeline)?;
        let index = load_index(&setup, true)?;
        let templates = templates(&setup)?;
        let events = load_events(&replay)?;
        let grid = ablation_grid(&setup.config);
        let outputs = grid
            .par_iter()
            .map(|c| {
                let idx = index.as_ref().filter(|_| c.rag);
                let commentator = Commentator::new(c.clone(), templates.clone(), idx).map_err(pipeline_error)?;
                let records = commentator.records(&events).map_err(pipeline_error)?;
                let label = c.label();
                let texts = align(&label, records.into_iter().map(|r| (r.id(), r.final_text)).collect(), &references)?;
                Ok(SystemOutput { label, texts })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        ablation_report(&outputs, &ref_texts).map_err(pipeline_error)?
    } else {
        if args.generated.is_empty() {
            return Err(CliError::Config("--generated is required unless --ablation is set".into()));
        }
        let mut outputs = Vec::new();
        for spec in &args.generated {
            let (label, path) = match spec.split_once('=') {
                Some((l, p)) => (l.to_string(), PathBuf::from(p)),
                None => {
                    let p = PathBuf::from(spec);
                    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.clone());
                    (stem, p)
                }
            };
            let texts = align(&label, load_texts(&existing(Some(path), "generated")?)?, &references)?;
            outputs.push(SystemOutput { label, texts });
        }
        let nb = NaiveBayes::builtin();
        let mut report = evaluate_run(&outputs, &ref_texts, nb).map_err(runtime)?;
        if !ref_texts.is_empty() {
            report.rows.push(original_row(&ref_texts, nb));
        }
        report
    };
    emit(args.out.as_deref(), &render(&report, &format)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn align_orders_by_reference() {
        let refs = pairs(&[("b", "x"), ("a", "y")]);
        let got = align("s", pairs(&[("a", "1"), ("b", "2")]), &refs).unwrap();
        assert_eq!(got, ["2", "1"]);
    }

    #[test]
    fn align_lists_missing_ids() {
        let refs = pairs(&[("a", "x"), ("c", "y")]);
        match align("s", pairs(&[("a", "1"), ("b", "2")]), &refs) {
            Err(CliError::Config(msg)) => {
                assert!(msg.contains("missing from generated: c"), "{msg}");
                assert!(msg.contains("not in references: b"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
