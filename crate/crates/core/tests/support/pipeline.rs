//! Replay, style corpus and reference fixtures for the commentary pipeline,
//! with golden files and structural checks.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use guandan_core::engine::{read_log, Action, Event};
use guandan_core::gateway::BackendKind;
use guandan_core::metrics::{evaluate_run, SystemOutput};
use guandan_core::pipeline::{
    ablation_grid, run_ablation, CommentaryRecord, Commentator, GenerationMode, PipelineConfig, Stage,
};
use guandan_core::retrieval::{load_corpus, StyleIndex};
use guandan_core::sim::replay;
use guandan_core::templates::{Language, Templates};
use guandan_core::tom::{analyze, TomOrder};

use super::scenarios::Check;

pub const STRIDE: usize = 6;

/// Set to rewrite golden files instead of comparing against them.
pub const UPDATE_ENV: &str = "GOLDEN_UPDATE";

/// The core crate's `tests` directory, from either crate's test targets.
pub fn tests_dir() -> PathBuf {
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    let own = here.join("tests/fixtures/match.jsonl");
    if own.exists() {
        here.join("tests")
    } else {
        here.join("../core/tests")
    }
}

pub fn fixture(name: &str) -> PathBuf {
    tests_dir().join("fixtures").join(name)
}

pub fn golden_path(name: &str) -> PathBuf {
    tests_dir().join("golden").join(name)
}

pub fn events() -> Vec<Event> {
    let file = std::fs::File::open(fixture("match.jsonl")).expect("replay fixture");
    read_log(std::io::BufReader::new(file)).expect("replay fixture parses")
}

pub fn index() -> StyleIndex {
    let (docs, errors) = load_corpus(&fixture("style.jsonl")).expect("style fixture");
    assert!(errors.is_empty(), "{errors:?}");
    StyleIndex::build(&docs, Default::default()).expect("default chunking")
}

/// Reference texts keyed by record id.
pub fn references() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(fixture("references.jsonl")).expect("reference fixture");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).expect("reference line");
            (v["id"].as_str().unwrap().to_string(), v["text"].as_str().unwrap().to_string())
        })
        .collect()
}

pub fn config(mode: GenerationMode) -> PipelineConfig {
    PipelineConfig { tom_order: 2, rag: true, mode, stride: STRIDE, ..Default::default() }
}

pub fn records(cfg: PipelineConfig, index: &StyleIndex) -> Result<Vec<CommentaryRecord>, String> {
    let idx = cfg.rag.then_some(index);
    let c = Commentator::builtin(cfg, idx).map_err(|e| e.to_string())?;
    c.records(&events()).map_err(|e| e.to_string())
}

pub fn to_jsonl(records: &[CommentaryRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
}

/// Compares `got` with the named golden file, or rewrites it when
/// [`UPDATE_ENV`] is set.
pub fn golden(name: &str, got: &str) -> Check {
    let path = golden_path(name);
    if std::env::var_os(UPDATE_ENV).is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        return std::fs::write(&path, got).map_err(|e| e.to_string());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want == got {
        return Ok(());
    }
    let line = want
        .lines()
        .zip(got.lines())
        .position(|(a, b)| a != b)
        .unwrap_or(want.lines().count().min(got.lines().count()));
    Err(format!("{name} differs from golden at line {}", line + 1))
}

pub fn golden_llm_jsonl(index: &StyleIndex) -> Check {
    golden("commentary_llm.jsonl", &to_jsonl(&records(config(GenerationMode::Llm), index)?))
}

pub fn golden_template_jsonl(index: &StyleIndex) -> Check {
    golden("commentary_template.jsonl", &to_jsonl(&records(config(GenerationMode::Template), index)?))
}

/// Guider prompt for the first commented play.
pub fn golden_guider_prompt(index: &StyleIndex) -> Check {
    let cfg = PipelineConfig { record_prompts: true, ..config(GenerationMode::Llm) };
    let first = records(cfg, index)?.into_iter().next().ok_or("no records")?;
    let prompt = first.provenance[0].prompt.clone().ok_or("prompt not recorded")?;
    golden("guider_prompt.txt", &prompt)
}

/// Second-order report before every commented play.
pub fn golden_tom_reports() -> Check {
    let events = events();
    let mut plays = 0usize;
    let mut out = String::new();
    let mut failure = None;
    replay(&events, &Default::default(), &mut |state, seat, action| {
        let i = plays;
        plays += 1;
        if i.is_multiple_of(STRIDE) {
            let obs = state.observation(seat);
            match analyze(&obs, &state.history_view(), Some(action), TomOrder::Second) {
                Ok(r) => out.push_str(&(serde_json::to_string(&r).unwrap() + "\n")),
                Err(e) => failure = Some(e.to_string()),
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = failure {
        return Err(e);
    }
    golden("tom_reports.jsonl", &out)
}

pub fn ordered_references(records: &[CommentaryRecord]) -> Result<Vec<String>, String> {
    let refs = references();
    records.iter().map(|r| refs.get(&r.id()).cloned().ok_or_else(|| format!("no reference for {}", r.id()))).collect()
}

pub fn golden_ablation_csv(index: &StyleIndex) -> Check {
    let base = config(GenerationMode::Template);
    let refs = ordered_references(&records(base.clone(), index)?)?;
    let report = run_ablation(&events(), &refs, &ablation_grid(&base), Some(index)).map_err(|e| e.to_string())?;
    golden("ablation.csv", &report.to_csv())
}

fn prompt_of(r: &CommentaryRecord, stage: Stage) -> Option<&str> {
    r.provenance.iter().find(|p| p.stage == stage).and_then(|p| p.prompt.as_deref())
}

fn stages(r: &CommentaryRecord) -> Vec<Stage> {
    r.provenance.iter().map(|p| p.stage).collect()
}

/// Disabling one stage drops its field, its provenance entry and its
/// section of the coordinator prompt, and nothing else.
pub fn check_structure(index: &StyleIndex) -> Check {
    let t = Templates::builtin(Language::Zh);
    for mode in [GenerationMode::Template, GenerationMode::Llm] {
        let base = PipelineConfig { record_prompts: true, ..config(mode) };
        let full = records(base.clone(), index)?;
        let no_rag = records(PipelineConfig { rag: false, ..base.clone() }, index)?;
        let no_tom = records(PipelineConfig { tom_order: 0, ..base.clone() }, index)?;
        if full.len() != no_rag.len() || full.len() != no_tom.len() || full.is_empty() {
            return Err(format!("{mode:?}: record counts {} {} {}", full.len(), no_rag.len(), no_tom.len()));
        }
        for ((f, r), m) in full.iter().zip(&no_rag).zip(&no_tom) {
            let id = f.id();
            if stages(f) != [Stage::Guider, Stage::Tom, Stage::Retrieval, Stage::Coordinator] {
                return Err(format!("{id}: stages {:?}", stages(f)));
            }
            if stages(r) != [Stage::Guider, Stage::Tom, Stage::Coordinator] || r.retrieved.is_some() {
                return Err(format!("{id}: retrieval left behind without RAG"));
            }
            if stages(m) != [Stage::Guider, Stage::Retrieval, Stage::Coordinator] || m.tom_text.is_some() {
                return Err(format!("{id}: analysis left behind without ToM"));
            }
            if f.retrieved.is_none() || f.tom_text.is_none() {
                return Err(format!("{id}: full record lacks a section"));
            }
            let same = |a: &CommentaryRecord, b: &CommentaryRecord| {
                a.game == b.game
                    && a.step == b.step
                    && a.seat == b.seat
                    && a.action == b.action
                    && a.guider_text == b.guider_text
            };
            if !same(f, r) || !same(f, m) {
                return Err(format!("{id}: shared fields differ"));
            }
            if f.provenance[..2] != r.provenance[..2] || f.tom_text != r.tom_text {
                return Err(format!("{id}: analysis changed when RAG was disabled"));
            }
            if f.provenance[0] != m.provenance[0] || f.provenance[2] != m.provenance[1] || f.retrieved != m.retrieved {
                return Err(format!("{id}: retrieval changed when ToM was disabled"));
            }

            let coord = prompt_of(f, Stage::Coordinator).ok_or("coordinator prompt not recorded")?;
            let style_text = match mode {
                GenerationMode::Template => {
                    let prefix = format!("{}\n{}\n", f.guider_text, f.tom_text.as_deref().unwrap());
                    f.final_text
                        .strip_prefix(&prefix)
                        .ok_or(format!("{id}: final text is not the joined sections"))?
                        .to_string()
                }
                GenerationMode::Llm => mock_reply(&f.provenance[2].digest),
            };
            let tom_section = t.say("section.tom", &[("text", f.tom_text.as_deref().unwrap())]);
            let style_section = t.say("section.style", &[("text", &style_text)]);
            if coord.replacen(&style_section, "", 1) != prompt_of(r, Stage::Coordinator).unwrap_or_default() {
                return Err(format!(
                    "{id}: coordinator prompt without RAG is not the full prompt minus the style section"
                ));
            }
            if mode == GenerationMode::Template {
                let tom = f.tom_text.as_deref().unwrap();
                if m.final_text != [f.guider_text.as_str(), &style_text].join("\n")
                    || r.final_text != [f.guider_text.as_str(), tom].join("\n")
                {
                    return Err(format!("{id}: final text does not drop exactly the disabled section"));
                }
            }
            if coord.replacen(&tom_section, "", 1) != prompt_of(m, Stage::Coordinator).unwrap_or_default() {
                return Err(format!(
                    "{id}: coordinator prompt without ToM is not the full prompt minus the analysis section"
                ));
            }
        }
    }
    Ok(())
}

/// Default mock reply to a request with `digest`.
fn mock_reply(digest: &str) -> String {
    format!("[mock:{}]", &digest[..12])
}

/// Mean cosine of llm-mode final texts against the references when the
/// mock answers each coordinator request with `reply(reference)`.
pub fn mock_cosine(index: &StyleIndex, reply: &dyn Fn(&str) -> String) -> Result<f64, String> {
    let base = config(GenerationMode::Llm);
    let first = records(base.clone(), index)?;
    let refs = ordered_references(&first)?;
    let mut cfg = base;
    cfg.backend.kind = BackendKind::Mock;
    for (r, text) in first.iter().zip(&refs) {
        let coord = r.provenance.iter().find(|p| p.stage == Stage::Coordinator).ok_or("no coordinator entry")?;
        cfg.backend.mock_table.insert(coord.digest.clone(), reply(text));
    }
    let second = records(cfg, index)?;
    let texts: Vec<String> = second.into_iter().map(|r| r.final_text).collect();
    if texts.iter().zip(&refs).any(|(t, r)| *t != reply(r)) {
        return Err("mock table did not answer every coordinator request".into());
    }
    let report = evaluate_run(
        &[SystemOutput { label: "mock".into(), texts }],
        &refs,
        guandan_core::metrics::NaiveBayes::builtin(),
    )
    .map_err(|e| e.to_string())?;
    report.rows[0].cosine.ok_or_else(|| "no cosine".into())
}

pub fn echo_cosine(index: &StyleIndex) -> Result<f64, String> {
    mock_cosine(index, &|r| r.to_string())
}

/// Vocabulary absent from every reference.
pub fn disjoint_cosine(index: &StyleIndex) -> Result<f64, String> {
    mock_cosine(index, &|_| "quartz zephyr".to_string())
}

/// Plays in the replay fixture.
pub fn play_count() -> usize {
    events().iter().filter(|e| matches!(e.action, Action::Play(_))).count()
}
