//! Text preprocessing shared by retrieval and evaluation: normalization,
//! tokenization, stopword removal, stemming and tf-idf vectors.
//!
//! Latin and digit runs become one token each; CJK runs emit every
//! character and every adjacent character pair, in position order; pairs
//! touching a stopword character are skipped.

pub mod porter;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub use porter::stem;

/// Stemming is repeated until the token stops changing, bounded by this many rounds.
const STEM_ROUNDS: usize = 8;

static STOPWORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    include_str!("../../data/stopwords_en.txt")
        .lines()
        .chain(include_str!("../../data/stopwords_zh.txt").lines())
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Empty,
    Latin,
    Cjk,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    /// Source length in characters.
    pub source_len: usize,
    pub script: Script,
}

pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xAC00..=0xD7AF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(token)
}

fn stem_fixed(token: &str) -> String {
    let mut cur = token.to_string();
    for _ in 0..STEM_ROUNDS {
        let next = stem(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn push_word(word: &mut String, out: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    let w = std::mem::take(word);
    if is_stopword(&w) {
        return;
    }
    let w = if w.bytes().all(|b| b.is_ascii_lowercase()) { stem_fixed(&w) } else { w };
    if !is_stopword(&w) {
        out.push(w);
    }
}

fn push_cjk(run: &mut Vec<char>, out: &mut Vec<String>) {
    let stop: Vec<bool> = run.iter().map(|c| is_stopword(c.encode_utf8(&mut [0; 4]))).collect();
    for i in 0..run.len() {
        if !stop[i] {
            out.push(run[i].to_string());
        }
        if i + 1 < run.len() && !stop[i] && !stop[i + 1] {
            let bi: String = run[i..=i + 1].iter().collect();
            if !is_stopword(&bi) {
                out.push(bi);
            }
        }
    }
    run.clear();
}

/// Normalizes and tokenizes `text`.
pub fn preprocess(text: &str) -> TokenStream {
    let normalized: String = text.nfc().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut run = Vec::new();
    let (mut latin, mut cjk) = (false, false);
    for c in normalized.chars() {
        if is_cjk(c) {
            push_word(&mut word, &mut tokens);
            run.push(c);
            cjk = true;
        } else if c.is_alphanumeric() {
            push_cjk(&mut run, &mut tokens);
            word.extend(c.to_lowercase());
            latin = true;
        } else {
            push_word(&mut word, &mut tokens);
            push_cjk(&mut run, &mut tokens);
        }
    }
    push_word(&mut word, &mut tokens);
    push_cjk(&mut run, &mut tokens);
    let script = match (latin, cjk) {
        (false, false) => Script::Empty,
        (true, false) => Script::Latin,
        (false, true) => Script::Cjk,
        (true, true) => Script::Mixed,
    };
    TokenStream { tokens, source_len: text.chars().count(), script }
}

/// Token to weight; kept ordered so serialized indexes are stable.
pub type SparseVector = BTreeMap<String, f64>;

/// Smoothed inverse document frequencies, `ln((1 + n) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Idf {
    pub docs: usize,
    pub weights: BTreeMap<String, f64>,
}

impl Idf {
    pub fn fit<'a, I>(docs: I) -> Idf
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut n = 0;
        for doc in docs {
            n += 1;
            let distinct: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }
        let weights =
            df.into_iter().map(|(t, d)| (t.to_string(), ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)).collect();
        Idf { docs: n, weights }
    }

    /// Raw term counts times idf, L2-normalized. Unknown terms are dropped.
    pub fn vectorize(&self, tokens: &[String]) -> SparseVector {
        let mut v = SparseVector::new();
        for t in tokens {
            if let Some(w) = self.weights.get(t) {
                *v.entry(t.clone()).or_insert(0.0) += w;
            }
        }
        normalize(&mut v);
        v
    }
}

pub fn norm(v: &SparseVector) -> f64 {
    v.values().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut SparseVector) {
    let n = norm(v);
    if n > 0.0 {
        v.values_mut().for_each(|x| *x /= n);
    }
}

pub fn dot(a: &SparseVector, b: &SparseVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter_map(|(t, x)| large.get(t).map(|y| x * y)).sum()
}

/// Cosine similarity clamped to [0, 1]; zero when either vector is zero.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(0.0, 1.0)
}
