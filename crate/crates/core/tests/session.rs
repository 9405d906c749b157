mod common;

use std::sync::Arc;

use icn_core::error::Error;
use icn_core::ingest::{read_transcript, Lexicon, Utterance};
use icn_core::session::{
    open_session, parse_log, replay, replay_session, write_log, EventKind, SessionConfig, Snapshot,
};

use common::*;

fn oscillating(cap: u32) -> Vec<u64> {
    let lex = Arc::new(Lexicon::load(data("fixtures/oscillating.lex")).unwrap());
    let mut cfg = SessionConfig::default();
    cfg.session.adjustment_cap = cap;
    let s = run(&read_transcript(data("fixtures/oscillating.jsonl")).unwrap(), lex, cfg, "");
    s.events()
        .iter()
        .filter(|e| e.kind == EventKind::AdjustmentIteration)
        .map(|e| e.payload["iteration"].as_u64().unwrap())
        .collect()
}

#[test]
fn first_idea_emits_the_minimal_event_sequence() {
    let lex = golden_lexicon();
    let mut s = open_session(SessionConfig::default(), lex, &golden_problem()).unwrap();
    let batch = s.process_utterance(&golden_transcript()[0]).unwrap();
    assert_eq!(
        batch.kinds(),
        vec![
            EventKind::UtteranceReceived,
            EventKind::IdeasExtracted,
            EventKind::IcnCreated,
            EventKind::ImageTagged,
            EventKind::MetricsUpdated,
        ]
    );
    assert_eq!(batch.first_seq(), Some(2));
    assert_eq!(s.events()[0].kind, EventKind::SessionOpened);
}

#[test]
fn oscillating_meaning_stops_at_the_cap() {
    assert_eq!(oscillating(3), vec![1, 2, 3]);
    assert_eq!(oscillating(1), vec![1]);
    assert_eq!(oscillating(5), vec![1, 2, 3, 4, 5]);
}

#[test]
fn every_oscillating_iteration_reports_a_change() {
    let lex = Arc::new(Lexicon::load(data("fixtures/oscillating.lex")).unwrap());
    let s = run(&read_transcript(data("fixtures/oscillating.jsonl")).unwrap(), lex, SessionConfig::default(), "");
    let changed: Vec<bool> = s
        .events()
        .iter()
        .filter(|e| e.kind == EventKind::AdjustmentIteration)
        .map(|e| e.payload["changed"].as_bool().unwrap())
        .collect();
    assert_eq!(changed, vec![true, true, true]);
}

#[test]
fn zero_cap_is_a_config_error() {
    let mut cfg = SessionConfig::default();
    cfg.session.adjustment_cap = 0;
    assert!(matches!(open_session(cfg, golden_lexicon(), ""), Err(Error::Config(_))));
    assert!(matches!(SessionConfig::parse("[session]\nadjustment_cap = 0\n"), Err(Error::Config(_))));
    assert!(SessionConfig::parse("[session]\nbogus = 1\n").is_err());
}

#[test]
fn stale_and_time_reversed_utterances_are_logged_and_refused() {
    let t = golden_transcript();
    let mut s = open_session(SessionConfig::default(), golden_lexicon(), "").unwrap();
    s.process_utterance(&t[1]).unwrap();
    let before = s.snapshot();
    let seq = s.last_seq();
    assert!(matches!(s.process_utterance(&t[0]), Err(Error::StaleUtterance { id: 1, last: 2 })));
    assert!(matches!(s.process_utterance(&t[1]), Err(Error::StaleUtterance { .. })));
    let mut late = t[2].clone();
    late.t = 0;
    assert!(matches!(s.process_utterance(&late), Err(Error::TimeRegression { .. })));
    let rejected = s.events_from(seq + 1);
    assert_eq!(rejected.len(), 3);
    assert!(rejected.iter().all(|e| e.kind == EventKind::UtteranceRejected && e.utterance.is_none()));
    assert!(rejected[0].payload["reason"].as_str().unwrap().contains("stale"));
    let after = s.snapshot();
    assert_eq!(after.graph, before.graph);
    assert_eq!(after.metrics, before.metrics);
    assert_eq!(after.utterance_count, 1);

    // the session goes on, and the log with its rejections replays
    s.process_utterance(&t[2]).unwrap();
    let replayed = replay(s.events(), SessionConfig::default(), golden_lexicon()).unwrap();
    assert_eq!(replayed.to_json(), s.snapshot().to_json());
}

#[test]
fn statement_seeds_the_problem_image() {
    let s = open_session(SessionConfig::default(), golden_lexicon(), &golden_problem()).unwrap();
    let image = s.problem_image().lemmas();
    for l in ["dates", "incorrect", "values", "readings", "range"] {
        assert!(image.contains(l), "{l} missing from {image:?}");
    }
    let empty = open_session(SessionConfig::default(), golden_lexicon(), "").unwrap();
    assert!(empty.problem_image().is_empty());
    assert_eq!(empty.metrics().unconsidered_needs.count, 0);
}

#[test]
fn unextractable_utterance_is_logged_and_skipped() {
    let mut s = open_session(SessionConfig::default(), golden_lexicon(), "").unwrap();
    let batch = s.process_utterance(&Utterance::new(1, "A", 0, "   ")).unwrap();
    assert_eq!(batch.kinds(), vec![EventKind::UtteranceReceived, EventKind::ExtractionFailed]);
    assert!(s.graph().is_empty());
    assert_eq!(s.utterance_count(), 1);
    // and the log still replays
    replay(s.events(), SessionConfig::default(), golden_lexicon()).unwrap();
}

#[test]
fn snapshot_is_a_pure_read() {
    let s = golden_session();
    let a = s.snapshot().to_json();
    let b = s.snapshot().to_json();
    assert_eq!(a, b);
    assert_eq!(Snapshot::from_json(&a).unwrap().to_json(), a);
}

#[test]
fn golden_run_matches_the_frozen_outputs() {
    let s = golden_session();
    let snapshot = std::fs::read_to_string(data("golden/snapshot.json")).unwrap();
    assert_eq!(s.snapshot().to_json(), snapshot.trim_end());
    let metrics = std::fs::read_to_string(data("golden/metrics.json")).unwrap();
    assert_eq!(icn_core::canonical::to_string_pretty(s.metrics()).unwrap(), metrics.trim_end());
}

#[test]
fn golden_metrics_values() {
    let s = golden_session();
    let m = s.metrics();
    assert_eq!(m.exploration.alternative_count, 3);
    assert_eq!(m.backtracking.count, 2);
    assert_eq!(m.repetitions.count, 1);
    assert_eq!(m.contradictions.count, 0);
    assert_eq!(m.fulfilled_requirements.count + m.unconsidered_needs.count, s.problem_image().len());
    assert_eq!(s.graph().icns.len(), 11);
    assert!(!s.snapshot().converged);
}

#[test]
fn empty_log_replays_to_an_empty_session() {
    let snap = replay(&[], SessionConfig::default(), golden_lexicon()).unwrap();
    assert!(snap.graph.is_empty());
    assert_eq!(snap.utterance_count, 0);
}

#[test]
fn log_gap_is_rejected() {
    let s = golden_session();
    let mut events = s.events().to_vec();
    events.remove(5);
    assert!(matches!(replay(&events, SessionConfig::default(), golden_lexicon()), Err(Error::SeqGap { expected: 6, .. })));
    let mut buf = Vec::new();
    write_log(&mut buf, &events).unwrap();
    assert!(matches!(parse_log(&buf[..]), Err(Error::SeqGap { .. })));
}

#[test]
fn tampered_log_diverges() {
    let s = golden_session();
    let mut events = s.events().to_vec();
    let idx = events.iter().position(|e| e.kind == EventKind::ImageTagged).unwrap();
    events[idx].payload["image"] = "observed_behavior".into();
    let seq = events[idx].seq;
    match replay_session(&events, SessionConfig::default(), golden_lexicon()) {
        Err(Error::ReplayDivergence { seq: at }) => assert_eq!(at, seq),
        other => panic!("expected divergence, got {:?}", other.map(|s| s.last_seq())),
    }
}

#[test]
fn replay_under_a_different_config_diverges() {
    let s = golden_session();
    let mut cfg = SessionConfig::default();
    cfg.icn.theta_join = 0.95;
    assert!(matches!(replay(s.events(), cfg, golden_lexicon()), Err(Error::ReplayDivergence { .. })));
}

#[test]
fn events_from_slices_by_seq() {
    let s = golden_session();
    assert_eq!(s.events_from(1).len(), s.events().len());
    assert_eq!(s.events_from(10)[0].seq, 10);
    assert!(s.events_from(s.last_seq() + 1).is_empty());
}
