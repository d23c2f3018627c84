//! Deterministic style corpora and queries for retrieval tests.

#![allow(dead_code)]

use guandan_core::retrieval::{ChunkConfig, Document, SearchMode, StyleIndex};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const THRESHOLDS: [f64; 4] = [0.0, 0.2, 0.5, 1.0];

const PHRASES: [&str; 32] = [
    "这一手炸弹打得精彩",
    "单张压得漂亮",
    "对子领出节奏很稳",
    "过牌等待队友接风",
    "顺子一气呵成",
    "钢板压制对手",
    "三连对出得果断",
    "同花顺震惊全场",
    "四个王锁定胜局",
    "逢人配救了这手牌",
    "进贡之后局势逆转",
    "抗贡成功士气大振",
    "报牌之后压力陡增",
    "级牌留到最后",
    "双下完美收官",
    "头游拿下升三级",
    "the bomb arrives at the perfect moment",
    "a calm pair lead keeps the tempo",
    "passing here protects the partner",
    "the straight clears the hand quickly",
    "a daring plate puts the opponents on the back foot",
    "the wild heart completes the straight flush",
    "tribute hands the leader a strong card",
    "four jokers end the argument",
    "an early bomb reveals a strong hand",
    "the last single decides the round",
    "牌型组合非常讲究",
    "节奏掌控得恰到好处",
    "防守反击一气呵成",
    "大牌压阵稳如泰山",
    "小牌先走轻装上阵",
    "配合默契相互掩护",
];

/// `n` distinct short documents, each within one node.
pub fn corpus(n: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let k = rng.random_range(2..=5);
            let picked: Vec<&str> = PHRASES.choose_multiple(&mut rng, k).copied().collect();
            Document { id: format!("doc-{i:03}"), text: format!("{}。第{i}条", picked.join("，")) }
        })
        .collect()
}

pub fn index(n: usize, seed: u64) -> StyleIndex {
    StyleIndex::build(&corpus(n, seed), ChunkConfig::default()).expect("default chunking")
}

/// Every document text, plus random phrase mixes and an off-topic query.
pub fn queries(docs: &[Document], extra: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<String> = docs.iter().map(|d| d.text.clone()).collect();
    for _ in 0..extra {
        let k = rng.random_range(1..=3);
        out.push(PHRASES.choose_multiple(&mut rng, k).copied().collect::<Vec<_>>().join(" "));
    }
    out.push("unrelated weather report".into());
    out
}

/// Tree and flat results agree exactly for every query and threshold, and
/// hit sets shrink as the threshold grows.
pub fn check_equivalence(index: &StyleIndex, queries: &[String]) -> Result<usize, String> {
    let mut compared = 0;
    for q in queries {
        let mut previous: Option<Vec<String>> = None;
        for theta in THRESHOLDS {
            let tree = index.query(q, theta, SearchMode::Tree).map_err(|e| e.to_string())?;
            let flat = index.query(q, theta, SearchMode::Flat).map_err(|e| e.to_string())?;
            if tree.hits != flat.hits {
                return Err(format!("θ={theta} query {q:?}: tree {:?} vs flat {:?}", tree.hits, flat.hits));
            }
            let ids: Vec<String> = flat.hits.iter().map(|h| h.id.clone()).collect();
            if let Some(prev) = &previous {
                if let Some(id) = ids.iter().find(|id| !prev.contains(id)) {
                    return Err(format!("θ={theta} query {q:?}: {id} appears only at the higher threshold"));
                }
            }
            previous = Some(ids);
            compared += 1;
        }
    }
    Ok(compared)
}

/// Two builds and a save/load round trip give identical bytes.
pub fn check_idempotent(n: usize, seed: u64, dir: &std::path::Path) -> Result<(), String> {
    let a = index(n, seed);
    let b = index(n, seed);
    if a.to_json() != b.to_json() {
        return Err(format!("{n}-node corpus: two builds differ"));
    }
    let p1 = dir.join(format!("a-{n}.json"));
    let p2 = dir.join(format!("b-{n}.json"));
    a.save(&p1).map_err(|e| e.to_string())?;
    StyleIndex::load(&p1).map_err(|e| e.to_string())?.save(&p2).map_err(|e| e.to_string())?;
    let (x, y) = (std::fs::read(&p1).map_err(|e| e.to_string())?, std::fs::read(&p2).map_err(|e| e.to_string())?);
    if x != y {
        return Err(format!("{n}-node corpus: save/load/save bytes differ"));
    }
    Ok(())
}
