//! Run reports.
//!
//! The JSON body carries logical time only, so replays produce identical
//! bytes; wall-clock latency is kept apart in [`LatencyStats`].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::deontic::{norm_states, violations, NormState};
use crate::eca::{EcaEngine, EngineConfig};
use crate::error::Error;
use crate::lang::LoadedContract;
use crate::stream::{as_pairs, StreamEvent};
use crate::term::Sym;
use crate::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationRecord {
    pub norm: Sym,
    pub t: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiredRecord {
    pub t: Timestamp,
    pub rule: Sym,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub contract: String,
    pub horizon: Timestamp,
    pub events_ingested: usize,
    pub ticks: usize,
    pub fired_actions: Vec<FiredRecord>,
    pub errors: usize,
    pub notifications: usize,
    pub violations: Vec<ViolationRecord>,
    /// State of every norm at the horizon.
    pub norms: BTreeMap<Sym, NormState>,
    /// `penalty/3` facts, printed.
    pub penalties: Vec<String>,
}

impl RunReport {
    pub fn from_engine(contract: &str, engine: &EcaEngine, horizon: Timestamp) -> Result<Self, Error> {
        let kb = engine.kb();
        let log = engine.log();
        let mut penalties: Vec<String> = kb
            .facts()
            .filter(|f| !f.neg && &*f.atom.pred == "penalty" && f.atom.arity() == 3)
            .map(|f| f.to_string())
            .collect();
        penalties.sort();
        penalties.dedup();
        Ok(RunReport {
            contract: contract.to_string(),
            horizon,
            events_ingested: engine.events_ingested(),
            ticks: engine.tick_count(),
            fired_actions: log
                .iter()
                .filter(|e| e.outcome.fired())
                .map(|e| FiredRecord { t: e.t, rule: e.rule.clone() })
                .collect(),
            errors: log.iter().filter(|e| matches!(e.outcome, crate::eca::Outcome::Error { .. })).count(),
            notifications: engine.notifications().len(),
            violations: violations(kb, horizon)?.into_iter().map(|(norm, t)| ViolationRecord { norm, t }).collect(),
            norms: norm_states(kb, horizon)?,
            penalties,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "contract {} up to t={}", self.contract, self.horizon)?;
        writeln!(
            f,
            "  {} events, {} ticks, {} fired actions, {} errors, {} notifications",
            self.events_ingested,
            self.ticks,
            self.fired_actions.len(),
            self.errors,
            self.notifications
        )?;
        for v in &self.violations {
            writeln!(f, "  violation {} at {}", v.norm, v.t)?;
        }
        for (id, s) in &self.norms {
            writeln!(f, "  norm {id}: {s}")?;
        }
        for p in &self.penalties {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

/// Result of monitoring a contract over an event stream.
#[derive(Clone, Debug)]
pub struct MonitorRun {
    pub report: RunReport,
    pub latency: Option<LatencyStats>,
    pub engine: EcaEngine,
}

/// Runs the contract's ECA rules over `events` up to `horizon` and reports.
pub fn run_monitor(
    contract: &LoadedContract,
    events: &[StreamEvent],
    horizon: Timestamp,
    config: EngineConfig,
) -> Result<MonitorRun, Error> {
    let mut engine = contract.engine(config)?;
    let outcome = engine.run(&as_pairs(events), horizon)?;
    let report = RunReport::from_engine(&contract.contract_id(), &engine, horizon)?;
    Ok(MonitorRun { report, latency: LatencyStats::from_samples(&outcome.latencies_ms), engine })
}

/// Per-event wall-clock cost in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub min_ms: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        Some(LatencyStats { count: samples.len(), min_ms: min, mean_ms: mean, max_ms: max })
    }
}

impl fmt::Display for LatencyStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "latency over {} events: min {:.3} ms, mean {:.3} ms, max {:.3} ms", self.count, self.min_ms, self.mean_ms, self.max_ms)
    }
}
