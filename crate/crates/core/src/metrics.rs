//! Automatic commentary metrics: tf-idf cosine against references,
//! lexicon sentiment, type-token ratio and a naive-Bayes positivity score,
//! collected into a report with one row per system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{cosine, preprocess, Idf};

/// Normalization constant of the compound sentiment score.
pub const COMPOUND_ALPHA: f64 = 15.0;
/// Laplace smoothing of the naive-Bayes classifier.
pub const NB_ALPHA: f64 = 1.0;

pub const CSV_HEADER: [&str; 8] =
    ["system", "neg", "neu", "pos", "compound", "cosine_similarity", "lexical_diversity", "snownlp"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("undefined metric: {0}")]
    Undefined(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("system {label} has {got} texts but there are {want} references")]
    LengthMismatch { label: String, got: usize, want: usize },
}

/// A tokenized background corpus supplying document frequencies.
#[derive(Debug, Clone, Default)]
pub struct Background {
    docs: Vec<Vec<String>>,
}

impl Background {
    pub fn new<S: AsRef<str>>(texts: &[S]) -> Background {
        Background { docs: texts.iter().map(|t| preprocess(t.as_ref()).tokens).collect() }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Cosine of the two texts with idf fit on the background plus both texts.
    pub fn cosine(&self, candidate: &str, reference: &str) -> f64 {
        let a = preprocess(candidate).tokens;
        let b = preprocess(reference).tokens;
        let idf = Idf::fit(self.docs.iter().map(Vec::as_slice).chain([a.as_slice(), b.as_slice()]));
        cosine(&idf.vectorize(&a), &idf.vectorize(&b))
    }
}

pub fn tfidf_cosine(candidate: &str, reference: &str, background: &[&str]) -> f64 {
    Background::new(background).cosine(candidate, reference)
}

/// Distinct tokens over total tokens.
pub fn ttr(tokens: &[String]) -> Result<f64, MetricError> {
    if tokens.is_empty() {
        return Err(MetricError::Undefined("type-token ratio of an empty token stream"));
    }
    let distinct: BTreeSet<&String> = tokens.iter().collect();
    Ok(distinct.len() as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sentiment {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

/// Term valences keyed by preprocessed token.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, f64>,
}

static BUILTIN_LEXICON: LazyLock<Lexicon> =
    LazyLock::new(|| Lexicon::parse(include_str!("../data/valence.tsv")).expect("built-in lexicon is valid"));

impl Lexicon {
    pub fn builtin() -> &'static Lexicon {
        &BUILTIN_LEXICON
    }

    /// Parses `term<TAB>valence` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Lexicon, MetricError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || MetricError::Config(format!("lexicon line {}: `{line}`", n + 1));
            let (term, v) = line.split_once('\t').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            let key = term_key(term).ok_or_else(bad)?;
            entries.insert(key, v);
        }
        Ok(Lexicon { entries })
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// The token a lexicon term is matched as.
fn term_key(term: &str) -> Option<String> {
    let tokens = preprocess(term).tokens;
    let whole = term.trim().to_lowercase();
    if tokens.contains(&whole) && !whole.is_ascii() {
        return Some(whole);
    }
    match tokens.as_slice() {
        [one] => Some(one.clone()),
        _ => None,
    }
}

impl Sentiment {
    pub const NEUTRAL: Sentiment = Sentiment { neg: 0.0, neu: 1.0, pos: 0.0, compound: 0.0 };

    /// Positive, negative and neutral mass: summed valence magnitudes for
    /// lexicon hits and one unit per other token.
    pub fn of_tokens(tokens: &[String], lexicon: &Lexicon) -> Sentiment {
        let (mut pos, mut neg, mut neu, mut sum) = (0.0, 0.0, 0.0, 0.0);
        for t in tokens {
            match lexicon.valence(t) {
                Some(v) if v > 0.0 => pos += v,
                Some(v) if v < 0.0 => neg += -v,
                _ => neu += 1.0,
            }
            sum += lexicon.valence(t).unwrap_or(0.0);
        }
        let total = pos + neg + neu;
        if total == 0.0 {
            return Sentiment::NEUTRAL;
        }
        let compound = (sum / (sum * sum + COMPOUND_ALPHA).sqrt()).clamp(-1.0, 1.0);
        Sentiment { neg: neg / total, neu: neu / total, pos: pos / total, compound }
    }
}

pub fn sentiment(text: &str) -> Sentiment {
    Sentiment::of_tokens(&preprocess(text).tokens, Lexicon::builtin())
}

/// Multinomial naive Bayes over two classes, index 0 positive and 1 negative.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    docs: [usize; 2],
    counts: [BTreeMap<String, u64>; 2],
    totals: [u64; 2],
    vocab: BTreeSet<String>,
}

static BUILTIN_NB: LazyLock<NaiveBayes> =
    LazyLock::new(|| NaiveBayes::from_corpus(include_str!("../data/nb_corpus.tsv")).expect("built-in corpus is valid"));

impl NaiveBayes {
    /// Trains on `(positive, tokens)` pairs. Both classes need examples.
    pub fn train<I: IntoIterator<Item = (bool, Vec<String>)>>(docs: I) -> Result<NaiveBayes, MetricError> {
        let mut nb = NaiveBayes { docs: [0; 2], counts: Default::default(), totals: [0; 2], vocab: BTreeSet::new() };
        for (positive, tokens) in docs {
            let c = usize::from(!positive);
            nb.docs[c] += 1;
            for t in tokens {
                *nb.counts[c].entry(t.clone()).or_default() += 1;
                nb.totals[c] += 1;
                nb.vocab.insert(t);
            }
        }
        if nb.docs.contains(&0) {
            return Err(MetricError::Config("naive Bayes needs training examples of both classes".into()));
        }
        Ok(nb)
    }

    /// Parses `pos|neg<TAB>sentence` lines and trains on them.
    pub fn from_corpus(text: &str) -> Result<NaiveBayes, MetricError> {
        let mut docs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (positive, sentence) = match line.split_once('\t') {
                Some(("pos", s)) => (true, s),
                Some(("neg", s)) => (false, s),
                _ => return Err(MetricError::Config(format!("corpus line {}: `{line}`", n + 1))),
            };
            docs.push((positive, preprocess(sentence).tokens));
        }
        NaiveBayes::train(docs)
    }

    pub fn builtin() -> &'static NaiveBayes {
        &BUILTIN_NB
    }

    /// The same model with class labels exchanged.
    pub fn swapped(&self) -> NaiveBayes {
        let mut nb = self.clone();
        nb.docs.swap(0, 1);
        nb.counts.swap(0, 1);
        nb.totals.swap(0, 1);
        nb
    }

    /// Documents per class, positive first.
    pub fn class_sizes(&self) -> [usize; 2] {
        self.docs
    }

    fn log_joint(&self, c: usize, tokens: &[String]) -> f64 {
        let n = (self.docs[0] + self.docs[1]) as f64;
        let denom = self.totals[c] as f64 + NB_ALPHA * self.vocab.len() as f64;
        let mut l = (self.docs[c] as f64 / n).ln();
        for t in tokens.iter().filter(|t| self.vocab.contains(*t)) {
            let count = self.counts[c].get(t).copied().unwrap_or(0) as f64;
            l += ((count + NB_ALPHA) / denom).ln();
        }
        l
    }

    /// P(positive | tokens); tokens outside the training vocabulary are ignored.
    pub fn score_tokens(&self, tokens: &[String]) -> f64 {
        let d = self.log_joint(1, tokens) - self.log_joint(0, tokens);
        1.0 / (1.0 + d.exp())
    }

    pub fn score(&self, text: &str) -> f64 {
        self.score_tokens(&preprocess(text).tokens)
    }
}

pub fn nb_score(text: &str) -> f64 {
    NaiveBayes::builtin().score(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub label: String,
    pub neg: Option<f64>,
    pub neu: Option<f64>,
    pub pos: Option<f64>,
    pub compound: Option<f64>,
    pub cosine: Option<f64>,
    pub ttr: Option<f64>,
    pub nb_score: Option<f64>,
}

impl EvalRow {
    pub fn cells(&self) -> [Option<f64>; 7] {
        [self.neg, self.neu, self.pos, self.compound, self.cosine, self.ttr, self.nb_score]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl EvalReport {
    /// Four decimals per value; absent values are written as `-`.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&csv_field(&r.label));
            for c in r.cells() {
                out.push(',');
                out.push_str(&cell(c));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.chars().count()).chain([6]).max().unwrap_or(6);
        let mut out = format!("{:<width$}", "system");
        for h in &CSV_HEADER[1..] {
            let _ = write!(out, "  {h:>8}");
        }
        out.push('\n');
        for r in &self.rows {
            let pad = width - r.label.chars().count();
            let _ = write!(out, "{}{}", r.label, " ".repeat(pad));
            for (c, h) in r.cells().iter().zip(&CSV_HEADER[1..]) {
                let _ = write!(out, "  {:>w$}", cell(*c), w = h.len().max(8));
            }
            out.push('\n');
        }
        out
    }
}

/// Generated texts of one system, aligned with the references by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub label: String,
    pub texts: Vec<String>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Metrics for texts; cosine is absent without references.
pub fn evaluate_texts(
    label: &str,
    texts: &[String],
    references: Option<(&[String], &Background)>,
    nb: &NaiveBayes,
) -> EvalRow {
    let tokens: Vec<Vec<String>> = texts.iter().map(|t| preprocess(t).tokens).collect();
    let sentiments: Vec<Sentiment> = tokens.iter().map(|t| Sentiment::of_tokens(t, Lexicon::builtin())).collect();
    let cosine = references
        .filter(|(refs, _)| !refs.is_empty())
        .and_then(|(refs, bg)| mean(texts.iter().zip(refs).map(|(g, r)| bg.cosine(g, r))));
    EvalRow {
        label: label.to_string(),
        neg: mean(sentiments.iter().map(|s| s.neg)),
        neu: mean(sentiments.iter().map(|s| s.neu)),
        pos: mean(sentiments.iter().map(|s| s.pos)),
        compound: mean(sentiments.iter().map(|s| s.compound)),
        cosine,
        ttr: mean(tokens.iter().filter_map(|t| ttr(t).ok())),
        nb_score: mean(tokens.iter().map(|t| nb.score_tokens(t))),
    }
}

/// One row per system, in input order. Each system must have one text per
/// reference unless there are no references.
pub fn evaluate_run(
    systems: &[SystemOutput],
    references: &[String],
    nb: &NaiveBayes,
) -> Result<EvalReport, MetricError> {
    for s in systems {
        if !references.is_empty() && s.texts.len() != references.len() {
            return Err(MetricError::LengthMismatch {
                label: s.label.clone(),
                got: s.texts.len(),
                want: references.len(),
            });
        }
    }
    let bg = Background::new(references);
    let rows = systems.iter().map(|s| evaluate_texts(&s.label, &s.texts, Some((references, &bg)), nb)).collect();
    Ok(EvalReport { rows })
}

/// The references scored as a system of their own, without cosine.
pub fn original_row(references: &[String], nb: &NaiveBayes) -> EvalRow {
    evaluate_texts("Original", references, None, nb)
}
