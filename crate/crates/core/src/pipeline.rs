//! Commentary pipeline: guider, theory-of-mind analysis, style retrieval and
//! a coordinator that merges the enabled sections, run for each play of a
//! replayed match.
//!
//! Each stage sees the acting seat's view before the play. In template mode
//! stage outputs are rendered locally and the final text joins them; in llm
//! mode every stage prompt goes through the configured backend.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combos::Combo;
use crate::engine::{EngineConfig, Event, MatchState, Seat, DECLARE_AT};
use crate::gateway::{Backend, BackendConfig, ChatRequest, GatewayError};
use crate::guider::Guider;
use crate::metrics::{evaluate_run, original_row, EvalReport, MetricError, NaiveBayes, SystemOutput};
use crate::retrieval::{filter, Hit, RetrievalError, SearchMode, StyleIndex, DEFAULT_THRESHOLD, DEFAULT_TOP_K};
use crate::sim::{self, SimError};
use crate::templates::{fill, Language, Templates};
use crate::tom::{self, TomError, TomOrder};

pub const DEFAULT_HISTORY_WINDOW: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage} stage: {source}")]
    Backend { stage: Stage, source: GatewayError },
    #[error("tom stage: {0}")]
    Tom(#[from] TomError),
    #[error("retrieval stage: {0}")]
    Retrieval(#[from] RetrievalError),
    #[error("replay: {0}")]
    Replay(SimError),
    #[error("evaluation: {0}")]
    Metrics(#[from] MetricError),
    #[error("output: {0}")]
    Sink(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Guider,
    Tom,
    Retrieval,
    Coordinator,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Guider => "guider",
            Stage::Tom => "tom",
            Stage::Retrieval => "retrieval",
            Stage::Coordinator => "coordinator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    #[default]
    Template,
    Llm,
}

impl FromStr for GenerationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "template" => Ok(GenerationMode::Template),
            "llm" => Ok(GenerationMode::Llm),
            _ => Err(format!("unknown mode `{s}` (expected template or llm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// 0 disables the analyzer; 1 and 2 select the analysis order.
    pub tom_order: u8,
    pub rag: bool,
    pub threshold: f64,
    pub top_k: usize,
    pub search: SearchMode,
    pub history_window: usize,
    pub language: Language,
    pub mode: GenerationMode,
    /// Comment on every `stride`-th play.
    pub stride: usize,
    /// Keep full prompt texts in provenance, not only digests.
    pub record_prompts: bool,
    pub engine: EngineConfig,
    pub backend: BackendConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tom_order: 2,
            rag: true,
            threshold: DEFAULT_THRESHOLD,
            top_k: DEFAULT_TOP_K,
            search: SearchMode::Tree,
            history_window: DEFAULT_HISTORY_WINDOW,
            language: Language::Zh,
            mode: GenerationMode::Template,
            stride: 1,
            record_prompts: false,
            engine: EngineConfig::default(),
            backend: BackendConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.tom_order > 2 {
            return Err(PipelineError::Config(format!("tom order {} not in 0..=2", self.tom_order)));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(PipelineError::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if self.stride == 0 || self.top_k == 0 {
            return Err(PipelineError::Config("stride and top_k must be at least 1".into()));
        }
        Ok(())
    }

    /// Row label in the ablation table.
    pub fn label(&self) -> String {
        let rag = if self.rag { "w RAG" } else { "w/o RAG" };
        let tom = match self.tom_order {
            0 => "Vanilla",
            1 => "1st-ToM",
            _ => "2nd-ToM",
        };
        format!("Our({rag})({tom})")
    }
}

/// The five ablation settings, in table order, sharing every other field.
pub fn ablation_grid(base: &PipelineConfig) -> Vec<PipelineConfig> {
    [(false, 0), (false, 1), (false, 2), (true, 1), (true, 2)]
        .into_iter()
        .map(|(rag, tom_order)| PipelineConfig { rag, tom_order, ..base.clone() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub stage: Stage,
    /// Digest of the stage request, as used by the mock backend.
    pub digest: String,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentaryRecord {
    pub game: u32,
    pub step: u32,
    pub seat: Seat,
    pub action: String,
    pub guider_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tom_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieved: Option<Vec<Hit>>,
    pub final_text: String,
    pub provenance: Vec<ProvenanceEntry>,
}

impl CommentaryRecord {
    /// `game-step`, the key used to align records with references.
    pub fn id(&self) -> String {
        format!("{}-{}", self.game, self.step)
    }
}

pub struct Commentator<'a> {
    config: PipelineConfig,
    guider: Guider,
    backend: Backend,
    index: Option<&'a StyleIndex>,
}

impl<'a> Commentator<'a> {
    pub fn new(
        config: PipelineConfig,
        templates: Templates,
        index: Option<&'a StyleIndex>,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        if config.rag && index.is_none_or(StyleIndex::is_empty) {
            return Err(PipelineError::Config("retrieval is enabled but the style index is missing or empty".into()));
        }
        if templates.language() != config.language {
            return Err(PipelineError::Config("templates and pipeline language differ".into()));
        }
        let backend = Backend::from_config(&config.backend)
            .map_err(|source| PipelineError::Backend { stage: Stage::Coordinator, source })?;
        Ok(Commentator { config, guider: Guider::new(templates), backend, index })
    }

    pub fn builtin(config: PipelineConfig, index: Option<&'a StyleIndex>) -> Result<Self, PipelineError> {
        let templates = Templates::builtin(config.language);
        Commentator::new(config, templates, index)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Runs `prompt` through the backend in llm mode; otherwise returns the
    /// local rendering.
    fn stage(
        &self,
        stage: Stage,
        prompt: &str,
        local: String,
        provenance: &mut Vec<ProvenanceEntry>,
    ) -> Result<String, PipelineError> {
        let req = ChatRequest::user("", prompt, &self.config.backend.model);
        let (out, backend) = match self.config.mode {
            GenerationMode::Template => (local, "template".to_string()),
            GenerationMode::Llm => (
                self.backend.complete(&req).map_err(|source| PipelineError::Backend { stage, source })?,
                self.config.backend.kind.to_string(),
            ),
        };
        provenance.push(ProvenanceEntry {
            stage,
            digest: req.digest(),
            backend,
            prompt: self.config.record_prompts.then(|| prompt.to_string()),
        });
        Ok(out)
    }

    fn keywords(&self, state: &MatchState, seat: Seat, action: &Combo) -> Vec<String> {
        let t = self.guider.templates();
        let obs = state.observation(seat);
        let mut k = vec![self.guider.kind(action.kind())];
        let phase = if action.is_pass() {
            "kw.pass"
        } else if obs.incumbent.is_some() {
            "kw.follow"
        } else {
            "kw.lead"
        };
        k.push(t.phrase(phase).to_string());
        k.push(t.say("kw.level", &[("rank", obs.level.rank().label())]));
        let left = (obs.counts[seat.index()] as usize).saturating_sub(action.len());
        if !action.is_pass() && left == 0 {
            k.push(t.phrase("kw.finish").to_string());
        } else if !action.is_pass() && left <= DECLARE_AT {
            k.push(t.phrase("kw.declare").to_string());
        }
        k.dedup();
        k
    }

    /// Commentary on `seat` playing `action` from `state`, which must be
    /// awaiting that seat's turn.
    pub fn step(&self, state: &MatchState, seat: Seat, action: &Combo) -> Result<CommentaryRecord, PipelineError> {
        let t = self.guider.templates();
        let obs = state.observation(seat);
        let history = state.history_view();
        let level = obs.level;
        let mut provenance = Vec::new();

        let mut bundle = self.guider.bundle(&obs, &history, self.config.history_window);
        let played = self.guider.action(&crate::engine::Action::Play(action.clone()), level);
        let line = t.say("hist.line", &[("seat", &self.guider.seat(seat)), ("action", &played)]);
        bundle.rendered_history =
            if history.events.is_empty() { line } else { format!("{}\n{line}", bundle.rendered_history) };
        let guider_text = self.stage(
            Stage::Guider,
            &self.guider.prompt(&bundle),
            self.guider.narrate(&obs, seat, action),
            &mut provenance,
        )?;
        let mut sections = t.say("section.guider", &[("text", &guider_text)]);
        let mut merged = vec![guider_text.clone()];

        let tom_text = if self.config.tom_order >= 1 {
            let order = if self.config.tom_order == 1 { TomOrder::First } else { TomOrder::Second };
            let report = tom::analyze(&obs, &history, Some(action), order)?;
            let rendered = tom::render_tom_prompt(&report, &self.guider, level);
            let prompt = fill(t.file("tom_prompt.txt"), &[("guider_text", &guider_text), ("report", &rendered)]);
            let text = self.stage(Stage::Tom, &prompt, rendered, &mut provenance)?;
            sections.push_str(&t.say("section.tom", &[("text", &text)]));
            merged.push(text.clone());
            Some(text)
        } else {
            None
        };

        let retrieved = match (self.config.rag, self.index) {
            (true, Some(index)) => {
                let keywords = self.keywords(state, seat, action);
                let query = format!("{guider_text}\n{}", keywords.join(" "));
                let result = index.query(&query, self.config.threshold, self.config.search)?;
                let result = filter(index, &result, &keywords, self.config.top_k);
                let snippets: Vec<&str> =
                    result.filtered.iter().filter_map(|h| index.node(&h.id).map(|n| n.content.as_str())).collect();
                let local = if snippets.is_empty() {
                    t.say("style.text", &[("snippet", t.phrase("none"))])
                } else {
                    snippets.iter().map(|s| t.say("style.text", &[("snippet", s)])).collect::<Vec<_>>().join("\n")
                };
                let shown = if snippets.is_empty() { t.phrase("none").to_string() } else { snippets.join("\n") };
                let prompt =
                    fill(t.file("retrieval_prompt.txt"), &[("snippets", &shown), ("guider_text", &guider_text)]);
                let text = self.stage(Stage::Retrieval, &prompt, local, &mut provenance)?;
                sections.push_str(&t.say("section.style", &[("text", &text)]));
                merged.push(text);
                Some(result.filtered)
            }
            _ => None,
        };

        let prompt = fill(t.file("coordinator_prompt.txt"), &[("sections", &sections)]);
        let final_text = self.stage(Stage::Coordinator, &prompt, merged.join("\n"), &mut provenance)?;
        Ok(CommentaryRecord {
            game: state.game(),
            step: state.step(),
            seat,
            action: action.to_string(),
            guider_text,
            tom_text,
            retrieved,
            final_text,
            provenance,
        })
    }

    /// Replays `events` and passes a record for every `stride`-th play to
    /// `sink`. Returns the number of records.
    pub fn commentate_match(
        &self,
        events: &[Event],
        sink: &mut dyn FnMut(CommentaryRecord) -> Result<(), String>,
    ) -> Result<usize, PipelineError> {
        let mut plays = 0usize;
        let mut emitted = 0usize;
        let mut failure: Option<PipelineError> = None;
        let result = sim::replay(events, &self.config.engine, &mut |state, seat, action| {
            let i = plays;
            plays += 1;
            if !i.is_multiple_of(self.config.stride) {
                return Ok(());
            }
            let record = self.step(state, seat, action).map_err(|e| {
                let msg = e.to_string();
                failure = Some(e);
                msg
            })?;
            sink(record).inspect_err(|e| {
                failure = Some(PipelineError::Sink(e.clone()));
            })?;
            emitted += 1;
            Ok(())
        });
        match (result, failure) {
            (Ok(_), _) => Ok(emitted),
            (Err(_), Some(e)) => Err(e),
            (Err(e), None) => Err(PipelineError::Replay(e)),
        }
    }

    /// All records of a match, in order.
    pub fn records(&self, events: &[Event]) -> Result<Vec<CommentaryRecord>, PipelineError> {
        let mut out = Vec::new();
        self.commentate_match(events, &mut |r| {
            out.push(r);
            Ok(())
        })?;
        Ok(out)
    }
}

/// Final texts produced by one configuration over a match.
pub fn ablation_texts(
    events: &[Event],
    config: &PipelineConfig,
    index: Option<&StyleIndex>,
) -> Result<SystemOutput, PipelineError> {
    let c = Commentator::builtin(config.clone(), index.filter(|_| config.rag))?;
    let texts = c.records(events)?.into_iter().map(|r| r.final_text).collect();
    Ok(SystemOutput { label: config.label(), texts })
}

/// One row per configuration in order, then the references as `Original`.
/// Without references the cosine column is absent and there is no
/// `Original` row.
pub fn ablation_report(outputs: &[SystemOutput], references: &[String]) -> Result<EvalReport, PipelineError> {
    let nb = NaiveBayes::builtin();
    let mut report = evaluate_run(outputs, references, nb)?;
    if !references.is_empty() {
        report.rows.push(original_row(references, nb));
    }
    Ok(report)
}

pub fn run_ablation(
    events: &[Event],
    references: &[String],
    grid: &[PipelineConfig],
    index: Option<&StyleIndex>,
) -> Result<EvalReport, PipelineError> {
    if grid.is_empty() {
        return Err(PipelineError::Config("ablation grid is empty".into()));
    }
    let outputs = grid.iter().map(|c| ablation_texts(events, c, index)).collect::<Result<Vec<_>, _>>()?;
    ablation_report(&outputs, references)
}
