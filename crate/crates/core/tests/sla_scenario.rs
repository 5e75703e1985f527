//! The hosting agreement end to end: load, check, monitor, report.

use std::path::PathBuf;

use slalog_core::eca::EngineConfig;
use slalog_core::lang::load_files;
use slalog_core::report::run_monitor;
use slalog_core::stream::parse_events;
use slalog_core::vnv::run_suite;
use slalog_core::deontic::NormStatus;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sla").join(name)
}

fn events() -> Vec<slalog_core::stream::StreamEvent> {
    parse_events(&std::fs::read_to_string(fixture("events.jsonl")).unwrap(), "events.jsonl").unwrap()
}

#[test]
fn contract_has_at_least_a_hundred_clauses() {
    let c = load_files(&[fixture("hosting.ctr")]).unwrap();
    let n: usize = c.modules().map(|m| m.rules.len() + m.facts.len() + m.priorities.len()).sum();
    assert!(n >= 100, "{n} clauses");
}

#[test]
fn suite_passes() {
    let c = load_files(&[fixture("hosting.ctr"), fixture("suite.ctr")]).unwrap();
    let report = run_suite(&c.knowledge_base().unwrap(), &c.tests(), &c.fixtures);
    assert!(report.ok(), "{report}");
    assert_eq!(report.passed, 7);
}

#[test]
fn outage_violates_availability_and_activates_penalty() {
    let c = load_files(&[fixture("hosting.ctr")]).unwrap();
    let run = run_monitor(&c, &events(), 10_000, EngineConfig::default()).unwrap();
    let r = &run.report;
    assert_eq!(r.contract, "hosting");
    assert_eq!(r.events_ingested, 7);
    assert_eq!(r.violations.len(), 1);
    assert_eq!((&*r.violations[0].norm, r.violations[0].t), ("o_avail", 6000));
    assert_eq!(r.norms["o_penalty"].status, NormStatus::Active);
    assert_eq!(r.norms["o_penalty"].since, 6001);
    assert_eq!(r.penalties, vec!["penalty(provider, server1, 500)".to_string()]);
    let fired: Vec<(u64, &str)> = r.fired_actions.iter().map(|f| (f.t, &*f.rule)).collect();
    assert!(fired.contains(&(4000, "escalate")) && fired.contains(&(6000, "penalize")), "{fired:?}");
}

#[test]
fn replay_is_byte_identical() {
    let c = load_files(&[fixture("hosting.ctr")]).unwrap();
    let a = run_monitor(&c, &events(), 10_000, EngineConfig::default()).unwrap();
    let b = run_monitor(&c, &events(), 10_000, EngineConfig::default()).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.engine.log(), b.engine.log());
}

#[test]
fn empty_stream_has_no_violations_before_any_trigger() {
    let c = load_files(&[fixture("hosting.ctr")]).unwrap();
    let run = run_monitor(&c, &[], 10_000, EngineConfig::default()).unwrap();
    assert!(run.report.violations.is_empty());
    assert_eq!(run.report.events_ingested, 0);
}
