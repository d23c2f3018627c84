mod support;

use std::collections::BTreeSet;

use guandan_core::pipeline::GenerationMode;
use support::pipeline as fx;

#[test]
fn every_record_has_a_reference() {
    let index = fx::index();
    let records = fx::records(fx::config(GenerationMode::Template), &index).unwrap();
    assert_eq!(records.len(), fx::play_count().div_ceil(fx::STRIDE));
    let ids: BTreeSet<String> = records.iter().map(|r| r.id()).collect();
    let refs: BTreeSet<String> = fx::references().into_keys().collect();
    assert_eq!(ids, refs);
}

#[test]
fn llm_mode_records_match_golden() {
    fx::golden_llm_jsonl(&fx::index()).unwrap();
}

#[test]
fn template_mode_records_match_golden() {
    fx::golden_template_jsonl(&fx::index()).unwrap();
}

#[test]
fn guider_prompt_matches_golden() {
    fx::golden_guider_prompt(&fx::index()).unwrap();
}

#[test]
fn tom_reports_match_golden() {
    fx::golden_tom_reports().unwrap();
}

#[test]
fn ablation_csv_matches_golden() {
    fx::golden_ablation_csv(&fx::index()).unwrap();
}

#[test]
fn two_runs_are_byte_identical() {
    let index = fx::index();
    let a = fx::to_jsonl(&fx::records(fx::config(GenerationMode::Llm), &index).unwrap());
    let b = fx::to_jsonl(&fx::records(fx::config(GenerationMode::Llm), &index).unwrap());
    assert_eq!(a, b);
}

#[test]
fn disabling_a_stage_removes_only_its_section() {
    fx::check_structure(&fx::index()).unwrap();
}

#[test]
fn echo_mock_scores_cosine_one() {
    let c = fx::echo_cosine(&fx::index()).unwrap();
    assert!((c - 1.0).abs() < 1e-9, "{c}");
}

#[test]
fn disjoint_mock_scores_cosine_zero() {
    assert_eq!(fx::disjoint_cosine(&fx::index()).unwrap(), 0.0);
}
