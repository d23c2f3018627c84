mod support;

use guandan_core::retrieval::{ingest, passes, Document, SearchMode};
use proptest::prelude::*;
use support::fixtures;

#[test]
fn fixture_corpora_have_expected_sizes() {
    assert_eq!(fixtures::index(20, 1).len(), 20);
    assert_eq!(fixtures::index(200, 2).len(), 200);
}

#[test]
fn tree_equals_flat_on_small_corpus() {
    let docs = fixtures::corpus(20, 1);
    let index = fixtures::index(20, 1);
    let n = fixtures::check_equivalence(&index, &fixtures::queries(&docs, 40, 11)).unwrap();
    assert_eq!(n, (20 + 40 + 1) * 4);
}

#[test]
fn tree_equals_flat_on_large_corpus() {
    let docs = fixtures::corpus(200, 2);
    let index = fixtures::index(200, 2);
    fixtures::check_equivalence(&index, &fixtures::queries(&docs, 100, 12)).unwrap();
}

#[test]
fn ingestion_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fixtures::check_idempotent(20, 1, dir.path()).unwrap();
    fixtures::check_idempotent(200, 2, dir.path()).unwrap();
}

#[test]
fn exact_duplicate_is_the_only_hit_at_one() {
    let docs = fixtures::corpus(20, 1);
    let index = fixtures::index(20, 1);
    for d in &docs {
        let r = index.query(&d.text, 1.0, SearchMode::Tree).unwrap();
        assert_eq!(r.hits.len(), 1, "{}", d.text);
        assert_eq!(r.hits[0].score, 1.0);
    }
}

#[test]
fn zero_threshold_returns_every_overlapping_node() {
    let docs = fixtures::corpus(20, 1);
    let index = fixtures::index(20, 1);
    let q = "炸弹";
    let want = docs.iter().filter(|d| d.text.contains(q)).count();
    let got = index.query(q, 0.0, SearchMode::Tree).unwrap().hits.len();
    assert!(want > 0);
    assert_eq!(got, want);
}

#[test]
fn empty_corpus_gives_empty_results() {
    let index = ingest(&[]);
    assert!(index.is_empty());
    assert!(index.query("炸弹", 0.0, SearchMode::Tree).unwrap().hits.is_empty());
    let blank = ingest(&[Document { id: "x".into(), text: "   ".into() }]);
    assert!(blank.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_corpora_agree(n in 1usize..60, seed in any::<u64>(), qseed in any::<u64>()) {
        let docs = fixtures::corpus(n, seed);
        let index = guandan_core::retrieval::StyleIndex::build(&docs, Default::default()).unwrap();
        fixtures::check_equivalence(&index, &fixtures::queries(&docs, 8, qseed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn hits_are_sorted_and_pass_threshold(q in "[炸弹顺子队友漂亮 a-z]{1,20}", theta in 0.0f64..=1.0) {
        let index = fixtures::index(20, 1);
        let r = index.query(&q, theta, SearchMode::Flat).unwrap();
        prop_assert!(r.hits.windows(2).all(|w| w[0].score >= w[1].score));
        prop_assert!(r.hits.iter().all(|h| passes(h.score, theta)));
    }
}
