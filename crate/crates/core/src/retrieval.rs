//! Style corpus retrieval: documents are chunked into nodes with tf-idf
//! vectors, grouped into centroid buckets, and queried by cosine similarity
//! above a threshold.
//!
//! A tree query scores the two buckets whose centroids are nearest the query,
//! then any other bucket whose weight bound could still exceed the threshold,
//! so it returns the same hits as a flat scan.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::{dot, is_cjk, preprocess, Idf, SparseVector};

pub const DEFAULT_CHUNK_UNITS: usize = 256;
pub const DEFAULT_OVERLAP: usize = 32;
pub const DEFAULT_THRESHOLD: f64 = 0.2;
pub const DEFAULT_TOP_K: usize = 3;
/// Buckets scored unconditionally by a tree query.
pub const TOP_BUCKETS: usize = 2;
/// Weight of each keyword match when filtering.
pub const KEYWORD_BONUS: f64 = 0.5;
const FORMAT_VERSION: u32 = 1;
/// Scores this close to 1 count as exact matches.
const UNIT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("chunk size must exceed overlap ({max_units} <= {overlap})")]
    Chunking { max_units: usize, overlap: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    /// Maximum units per node: one per CJK character or other word.
    pub max_units: usize,
    pub overlap: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig { max_units: DEFAULT_CHUNK_UNITS, overlap: DEFAULT_OVERLAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentNode {
    pub id: String,
    pub source: String,
    pub content: String,
    pub vector: SparseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub centroid: SparseVector,
    /// Per-term maximum over member vectors; bounds any member's score.
    pub max_weights: SparseVector,
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleIndex {
    pub version: u32,
    pub chunking: ChunkConfig,
    pub nodes: Vec<DocumentNode>,
    pub idf: Idf,
    pub buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub hits: Vec<Hit>,
    pub threshold: f64,
    pub filtered: Vec<Hit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Tree,
    Flat,
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(SearchMode::Tree),
            "flat" => Ok(SearchMode::Flat),
            _ => Err(format!("unknown search mode `{s}` (expected tree or flat)")),
        }
    }
}

/// Splits text into units, keeping trailing whitespace and punctuation with
/// the unit before it so chunks concatenate back to the source.
fn units(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_word = false;
    for (i, c) in text.char_indices() {
        let boundary = if is_cjk(c) {
            true
        } else if c.is_alphanumeric() {
            !in_word
        } else {
            in_word = false;
            continue;
        };
        if boundary && i > start {
            out.push(&text[start..i]);
            start = i;
        }
        in_word = !is_cjk(c);
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out
}

pub fn chunk(text: &str, cfg: &ChunkConfig) -> Result<Vec<String>, RetrievalError> {
    if cfg.max_units <= cfg.overlap {
        return Err(RetrievalError::Chunking { max_units: cfg.max_units, overlap: cfg.overlap });
    }
    let u = units(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < u.len() {
        let end = (i + cfg.max_units).min(u.len());
        out.push(u[i..end].concat().trim().to_string());
        if end == u.len() {
            break;
        }
        i = end - cfg.overlap;
    }
    out.retain(|c| !c.is_empty());
    Ok(out)
}

fn content_id(content: &str) -> String {
    let h = Sha256::digest(content.as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn add_scaled(acc: &mut SparseVector, v: &SparseVector, scale: f64) {
    for (t, w) in v {
        *acc.entry(t.clone()).or_insert(0.0) += w * scale;
    }
}

/// Groups node vectors into `ceil(sqrt(n))` buckets: seeds are chosen by
/// farthest-first traversal from node 0, then each node joins the seed it
/// is most similar to (lowest index on ties).
fn build_buckets(nodes: &[DocumentNode]) -> Vec<Bucket> {
    let n = nodes.len();
    if n == 0 {
        return Vec::new();
    }
    let b = (n as f64).sqrt().ceil() as usize;
    let mut seeds = vec![0usize];
    let mut closest: Vec<f64> = nodes.iter().map(|x| dot(&x.vector, &nodes[0].vector)).collect();
    while seeds.len() < b {
        let next = (0..n)
            .filter(|i| !seeds.contains(i))
            .min_by(|&i, &j| closest[i].total_cmp(&closest[j]).then(i.cmp(&j)))
            .expect("more nodes than seeds");
        seeds.push(next);
        for i in 0..n {
            closest[i] = closest[i].max(dot(&nodes[i].vector, &nodes[next].vector));
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); b];
    for (i, node) in nodes.iter().enumerate() {
        let best = (0..b)
            .max_by(|&x, &y| {
                let (sx, sy) = (dot(&node.vector, &nodes[seeds[x]].vector), dot(&node.vector, &nodes[seeds[y]].vector));
                sx.total_cmp(&sy).then(y.cmp(&x))
            })
            .expect("at least one bucket");
        members[best].push(i);
    }
    members
        .into_iter()
        .map(|m| {
            let mut centroid = SparseVector::new();
            let mut max_weights = SparseVector::new();
            for &i in &m {
                add_scaled(&mut centroid, &nodes[i].vector, 1.0 / m.len() as f64);
                for (t, w) in &nodes[i].vector {
                    let e = max_weights.entry(t.clone()).or_insert(0.0);
                    *e = e.max(*w);
                }
            }
            Bucket { centroid, max_weights, nodes: m.iter().map(|&i| nodes[i].id.clone()).collect() }
        })
        .collect()
}

fn check_threshold(theta: f64) -> Result<(), RetrievalError> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(RetrievalError::Threshold(theta))
    }
}

/// Whether `score` passes `theta`: strictly above, except that a threshold of
/// 1 admits exact matches.
pub fn passes(score: f64, theta: f64) -> bool {
    if theta >= 1.0 {
        score >= 1.0
    } else {
        score > theta
    }
}

fn similarity(q: &SparseVector, v: &SparseVector) -> f64 {
    let s = dot(q, v).clamp(0.0, 1.0);
    if s >= 1.0 - UNIT_EPS {
        1.0
    } else {
        s
    }
}

impl StyleIndex {
    /// Chunks, deduplicates by content and indexes `docs` in order.
    pub fn build(docs: &[Document], cfg: ChunkConfig) -> Result<StyleIndex, RetrievalError> {
        let mut seen = BTreeSet::new();
        let mut raw = Vec::new();
        for d in docs {
            for content in chunk(&d.text, &cfg)? {
                let id = content_id(&content);
                if seen.insert(id.clone()) {
                    let tokens = preprocess(&content).tokens;
                    raw.push((id, d.id.clone(), content, tokens));
                }
            }
        }
        let idf = Idf::fit(raw.iter().map(|r| r.3.as_slice()));
        let nodes: Vec<DocumentNode> = raw
            .into_iter()
            .map(|(id, source, content, tokens)| DocumentNode { vector: idf.vectorize(&tokens), id, source, content })
            .collect();
        let buckets = build_buckets(&nodes);
        Ok(StyleIndex { version: FORMAT_VERSION, chunking: cfg, nodes, idf, buckets })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&DocumentNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// L2-normalized tf-idf vector of `text`; unknown terms are dropped.
    pub fn embed(&self, text: &str) -> SparseVector {
        self.idf.vectorize(&preprocess(text).tokens)
    }

    fn collect(&self, q: &SparseVector, theta: f64, ids: impl Iterator<Item = usize>) -> Vec<Hit> {
        let mut hits: Vec<Hit> = ids
            .map(|i| Hit { id: self.nodes[i].id.clone(), score: similarity(q, &self.nodes[i].vector) })
            .filter(|h| passes(h.score, theta))
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        hits
    }

    pub fn query(&self, text: &str, theta: f64, mode: SearchMode) -> Result<RetrievalResult, RetrievalError> {
        check_threshold(theta)?;
        let q = self.embed(text);
        let hits = match mode {
            SearchMode::Flat => self.collect(&q, theta, 0..self.nodes.len()),
            SearchMode::Tree => {
                let position: BTreeMap<&str, usize> =
                    self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
                let mut order: Vec<usize> = (0..self.buckets.len()).collect();
                let near: Vec<f64> = self.buckets.iter().map(|b| dot(&q, &b.centroid)).collect();
                order.sort_by(|&a, &b| near[b].total_cmp(&near[a]).then(a.cmp(&b)));
                let chosen = order.iter().enumerate().filter(|&(rank, &b)| {
                    rank < TOP_BUCKETS || {
                        let bound = dot(&q, &self.buckets[b].max_weights);
                        bound > 0.0 && (bound >= 1.0 - UNIT_EPS || passes(bound, theta))
                    }
                });
                let ids = chosen.flat_map(|(_, &b)| self.buckets[b].nodes.iter().map(|id| position[id.as_str()]));
                self.collect(&q, theta, ids)
            }
        };
        Ok(RetrievalResult { filtered: hits.clone(), hits, threshold: theta })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("index serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| RetrievalError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<StyleIndex, RetrievalError> {
        let shown = path.display().to_string();
        let text =
            std::fs::read_to_string(path).map_err(|source| RetrievalError::Io { path: shown.clone(), source })?;
        let index: StyleIndex = serde_json::from_str(&text)
            .map_err(|e| RetrievalError::Format { path: shown.clone(), message: e.to_string() })?;
        if index.version != FORMAT_VERSION {
            return Err(RetrievalError::Format {
                path: shown,
                message: format!("unsupported version {}", index.version),
            });
        }
        Ok(index)
    }
}

pub fn ingest(docs: &[Document]) -> StyleIndex {
    StyleIndex::build(docs, ChunkConfig::default()).expect("default chunking is valid")
}

/// Re-ranks hits by similarity times `1 + 0.5 * matches`, where matches
/// counts keywords occurring in the node, and keeps the best `k`.
pub fn filter(index: &StyleIndex, result: &RetrievalResult, keywords: &[String], k: usize) -> RetrievalResult {
    let keywords: Vec<String> = keywords.iter().map(|w| w.to_lowercase()).filter(|w| !w.is_empty()).collect();
    let mut ranked: Vec<(f64, usize)> = result
        .hits
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let content = index.node(&h.id).map(|n| n.content.to_lowercase()).unwrap_or_default();
            let matches = keywords.iter().filter(|w| content.contains(w.as_str())).count();
            (h.score * (1.0 + KEYWORD_BONUS * matches as f64), i)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let filtered = ranked.into_iter().take(k.max(1)).map(|(_, i)| result.hits[i].clone()).collect();
    RetrievalResult { hits: result.hits.clone(), threshold: result.threshold, filtered }
}

/// Loads a corpus from a directory of `.txt` files (ids are file stems, in
/// name order) or a JSONL file of `{id, text}`. Unreadable documents are
/// reported and skipped.
pub fn load_corpus(path: &Path) -> Result<(Vec<Document>, Vec<RetrievalError>), RetrievalError> {
    let shown = path.display().to_string();
    let io_err = |source| RetrievalError::Io { path: shown.clone(), source };
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(io_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        for f in files {
            match std::fs::read_to_string(&f) {
                Ok(text) => {
                    docs.push(Document { id: f.file_stem().unwrap_or_default().to_string_lossy().into_owned(), text })
                }
                Err(source) => errors.push(RetrievalError::Io { path: f.display().to_string(), source }),
            }
        }
    } else {
        let file = std::fs::File::open(path).map_err(io_err)?;
        for (n, line) in io::BufReader::new(file).lines().enumerate() {
            let at = format!("{shown}:{}", n + 1);
            match line {
                Ok(l) if l.trim().is_empty() => {}
                Ok(l) => match serde_json::from_str::<Document>(&l) {
                    Ok(d) => docs.push(d),
                    Err(e) => errors.push(RetrievalError::Format { path: at, message: e.to_string() }),
                },
                Err(source) => errors.push(RetrievalError::Io { path: at, source }),
            }
        }
    }
    Ok((docs, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str) -> Document {
        Document { id: id.into(), text: text.into() }
    }

    #[test]
    fn empty_corpus() {
        let idx = ingest(&[]);
        assert!(idx.is_empty() && idx.buckets.is_empty());
        assert!(idx.query("炸弹", 0.0, SearchMode::Tree).unwrap().hits.is_empty());
    }

    #[test]
    fn short_document_is_one_node() {
        let text = (0..100).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let idx = ingest(&[doc("a", &text)]);
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.nodes[0].content, text);
    }

    #[test]
    fn chunks_overlap() {
        let text: String = "一二三四五六七八九十".into();
        let c = chunk(&text, &ChunkConfig { max_units: 4, overlap: 1 }).unwrap();
        assert_eq!(c, ["一二三四", "四五六七", "七八九十"]);
        assert!(chunk(&text, &ChunkConfig { max_units: 2, overlap: 2 }).is_err());
    }

    #[test]
    fn units_keep_punctuation() {
        assert_eq!(units("好牌！ play it"), ["好", "牌！ ", "play ", "it"]);
    }

    #[test]
    fn identical_text_scores_one() {
        let idx = ingest(&[doc("a", "炸弹压住了对手"), doc("b", "顺子接风")]);
        let r = idx.query("炸弹压住了对手", 1.0, SearchMode::Tree).unwrap();
        assert_eq!(r.hits.len(), 1);
        assert_eq!(r.hits[0].score, 1.0);
        assert!(idx.query("qwerty", 0.0, SearchMode::Flat).unwrap().hits.is_empty());
    }

    #[test]
    fn threshold_validated() {
        assert!(ingest(&[]).query("x", 1.5, SearchMode::Tree).is_err());
    }

    #[test]
    fn filter_prefers_keywords() {
        let idx = ingest(&[doc("a", "漂亮的对子打法"), doc("b", "漂亮的炸弹打法")]);
        let r = idx.query("漂亮打法", 0.0, SearchMode::Flat).unwrap();
        assert_eq!(r.hits.len(), 2);
        let f = filter(&idx, &r, &["炸弹".into()], 1);
        assert_eq!(idx.node(&f.filtered[0].id).unwrap().source, "b");
        let all = filter(&idx, &r, &[], 5);
        assert_eq!(all.filtered.len(), 2);
    }

    #[test]
    fn save_load_round_trip() {
        let idx = ingest(&[doc("a", "炸弹压住了对手"), doc("b", "顺子接风"), doc("c", "单张过牌")]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("index.json");
        idx.save(&p).unwrap();
        assert_eq!(StyleIndex::load(&p).unwrap(), idx);
    }
}
