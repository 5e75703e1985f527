//! Event-condition-action rules evaluated by polling the knowledge base.
//!
//! Every tick evaluates the due rules against one snapshot of the knowledge
//! base, then commits their actions one transaction per rule in ascending id
//! order. Notifications are buffered and only released when their rule's
//! transaction commits. The variable `Now` is bound to the tick time in
//! events, conditions and actions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::Serialize;

use crate::error::Error;
use crate::event::{detect, record_events, Detection, EventExpr};
use crate::kb::{KnowledgeBase, RuleModule, Update, DYNAMIC_MODULE};
use crate::term::{sym, Constant, Literal, Sym, Term};
use crate::wfs::{solve, TruthValue};
use crate::Timestamp;

pub const DEFAULT_PERIOD: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schedule {
    Every(u64),
    OnIngest,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EcaRule {
    pub id: Sym,
    /// `None` defers to the engine's default period.
    pub schedule: Option<Schedule>,
    pub event: Vec<Literal>,
    pub condition: Vec<Literal>,
    pub action: Vec<Literal>,
    pub else_action: Option<Vec<Literal>>,
}

pub type Bindings = BTreeMap<Sym, Term>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    EventMiss,
    ConditionMiss,
    Fired {
        #[serde(serialize_with = "ser_bindings")]
        bindings: Bindings,
    },
    ElseFired {
        #[serde(serialize_with = "ser_bindings")]
        bindings: Bindings,
    },
    Error {
        message: String,
    },
}

impl Outcome {
    pub fn fired(&self) -> bool {
        matches!(self, Outcome::Fired { .. } | Outcome::ElseFired { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TickEntry {
    pub t: Timestamp,
    pub rule: Sym,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Notification {
    pub t: Timestamp,
    pub rule: Sym,
    #[serde(serialize_with = "ser_term")]
    pub channel: Term,
    #[serde(serialize_with = "ser_term")]
    pub payload: Term,
}

impl Notification {
    /// One NDJSON record.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("notification serializes")
    }
}

/// Strings and numbers map to JSON scalars; anything else is printed.
pub fn term_json(t: &Term) -> serde_json::Value {
    match t {
        Term::Const(Constant::Text(s) | Constant::Symbol(s)) => serde_json::Value::from(&**s),
        Term::Const(Constant::Integer(i)) => serde_json::Value::from(*i),
        Term::Const(Constant::Decimal(d)) => serde_json::Value::from(d.0),
        other => serde_json::Value::from(other.to_string()),
    }
}

fn ser_term<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    term_json(t).serialize(s)
}

fn ser_bindings<S: serde::Serializer>(b: &Bindings, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(b.iter().map(|(k, v)| (&**k, v.to_string())))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    /// Period of rules without an `every` field.
    pub default_period: u64,
    /// Events may arrive this many ms late and are sorted back into place;
    /// a larger regression is rejected.
    pub reorder_window: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { default_period: DEFAULT_PERIOD, reorder_window: 0 }
    }
}

/// Totals of one `run`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub events: usize,
    pub ticks: usize,
    /// Wall-clock cost per ingested event (ingest plus tick), in ms.
    pub latencies_ms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Consumed {
    Detection(Detection),
    Answer(Vec<(Sym, Term)>),
}

enum EventSpec {
    Always,
    Detect(EventExpr),
    Query(Vec<Literal>),
}

const OPERATORS: [&str; 5] = ["seq", "both", "either", "absent", "times"];

fn event_spec(rule: &EcaRule) -> Result<EventSpec, Error> {
    match rule.event.as_slice() {
        [] => Ok(EventSpec::Always),
        [l] if !l.neg && !l.naf => {
            let a = &l.atom;
            if &*a.pred == "detect" && a.arity() == 1 {
                Ok(EventSpec::Detect(EventExpr::from_term(&a.args[0])?))
            } else if OPERATORS.contains(&&*a.pred) {
                Ok(EventSpec::Detect(EventExpr::from_term(&a.to_term())?))
            } else {
                Ok(EventSpec::Query(rule.event.clone()))
            }
        }
        _ => Ok(EventSpec::Query(rule.event.clone())),
    }
}

fn substitute(lits: &[Literal], b: &Bindings, now: Timestamp) -> Vec<Literal> {
    lits.iter()
        .map(|l| {
            l.map_vars(&mut |v| match b.get(&v.name) {
                Some(t) => t.clone(),
                None if &*v.name == "Now" => Term::int(now as i64),
                None => Term::Var(v.clone()),
            })
        })
        .collect()
}

fn reportable(name: &str) -> bool {
    !name.starts_with('_') && name != "Now"
}

/// First True answer of `query`, if any.
fn first_true(kb: &KnowledgeBase, query: &[Literal]) -> Result<Option<Vec<(Sym, Term)>>, Error> {
    if query.is_empty() {
        return Ok(Some(Vec::new()));
    }
    Ok(solve(kb, query)?.into_iter().find(|a| a.truth == TruthValue::True).map(|a| a.bindings))
}

/// Result of evaluating one rule against the tick snapshot.
struct Plan {
    outcome: Outcome,
    actions: Vec<Literal>,
    consumed: Option<Consumed>,
}

/// Owns the knowledge base and the rule set of one monitoring run.
#[derive(Clone, Debug)]
pub struct EcaEngine {
    kb: KnowledgeBase,
    rules: Vec<EcaRule>,
    config: EngineConfig,
    /// Modules available to `add_module("path")`, keyed by path as written.
    library: BTreeMap<String, RuleModule>,
    last_tick: Option<Timestamp>,
    last_eval: HashMap<Sym, Timestamp>,
    consumed: HashMap<Sym, BTreeSet<Consumed>>,
    ingest_pending: bool,
    events: usize,
    log: Vec<TickEntry>,
    notifications: Vec<Notification>,
}

impl EcaEngine {
    pub fn new(kb: KnowledgeBase, mut rules: Vec<EcaRule>) -> Self {
        rules.sort_by(|a, b| a.id.cmp(&b.id));
        EcaEngine {
            kb,
            rules,
            config: EngineConfig::default(),
            library: BTreeMap::new(),
            last_tick: None,
            last_eval: HashMap::new(),
            consumed: HashMap::new(),
            ingest_pending: false,
            events: 0,
            log: Vec::new(),
            notifications: Vec::new(),
        }
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_library(mut self, library: BTreeMap<String, RuleModule>) -> Self {
        self.library = library;
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn into_kb(self) -> KnowledgeBase {
        self.kb
    }

    pub fn rules(&self) -> &[EcaRule] {
        &self.rules
    }

    pub fn log(&self) -> &[TickEntry] {
        &self.log
    }

    pub fn notifications(&self) -> &[Notification] {
        &self.notifications
    }

    pub fn events_ingested(&self) -> usize {
        self.events
    }

    pub fn last_tick(&self) -> Option<Timestamp> {
        self.last_tick
    }

    pub fn tick_count(&self) -> usize {
        let ticks: BTreeSet<Timestamp> = self.log.iter().map(|e| e.t).collect();
        ticks.len()
    }

    pub fn fired_count(&self) -> usize {
        self.log.iter().filter(|e| e.outcome.fired()).count()
    }

    /// Appends one batch of occurrences to the narrative as a single transaction.
    pub fn ingest(&mut self, batch: &[(Term, Timestamp)]) -> Result<(), Error> {
        if let (Some(prev), Some(&(_, t))) = (self.last_tick, batch.iter().min_by_key(|(_, t)| *t)) {
            if t <= prev {
                return Err(Error::OutOfOrder { position: self.events + 1, t, previous: prev });
            }
        }
        record_events(&mut self.kb, batch)?;
        self.events += batch.len();
        self.ingest_pending |= !batch.is_empty();
        Ok(())
    }

    fn period(&self, r: &EcaRule) -> Option<u64> {
        match r.schedule {
            Some(Schedule::Every(p)) => Some(p),
            Some(Schedule::OnIngest) => None,
            None => Some(self.config.default_period),
        }
    }

    fn due(&self, r: &EcaRule, now: Timestamp) -> bool {
        match self.period(r) {
            Some(p) => now >= self.last_eval.get(&r.id).copied().unwrap_or(0).saturating_add(p.max(1)),
            None => self.ingest_pending,
        }
    }

    fn evaluate(&self, snap: &KnowledgeBase, r: &EcaRule, now: Timestamp) -> Result<Plan, Error> {
        let consumed = self.consumed.get(&r.id);
        let seen = |c: &Consumed| consumed.is_some_and(|s| s.contains(c));
        let (mut bindings, mark) = match event_spec(r)? {
            EventSpec::Always => (Bindings::new(), None),
            EventSpec::Detect(e) => {
                let hit = detect(snap, &e, Some(now))?.into_iter().find(|d| !seen(&Consumed::Detection(d.clone())));
                match hit {
                    Some(d) => (d.bindings.clone(), Some(Consumed::Detection(d))),
                    None => return Ok(Plan { outcome: Outcome::EventMiss, actions: Vec::new(), consumed: None }),
                }
            }
            EventSpec::Query(q) => {
                let q = substitute(&q, &Bindings::new(), now);
                let ground = q.iter().all(Literal::is_ground);
                let hit = solve(snap, &q)?
                    .into_iter()
                    .filter(|a| a.truth == TruthValue::True)
                    .find(|a| ground || !seen(&Consumed::Answer(a.bindings.clone())));
                match hit {
                    Some(a) => {
                        let mark = (!ground).then(|| Consumed::Answer(a.bindings.clone()));
                        (a.bindings.into_iter().collect(), mark)
                    }
                    None => return Ok(Plan { outcome: Outcome::EventMiss, actions: Vec::new(), consumed: None }),
                }
            }
        };
        let cond = substitute(&r.condition, &bindings, now);
        let (outcome, actions) = match first_true(snap, &cond)? {
            Some(extra) => {
                bindings.extend(extra);
                let actions = substitute(&r.action, &bindings, now);
                (Outcome::Fired { bindings: Bindings::new() }, actions)
            }
            None => match &r.else_action {
                Some(e) => (Outcome::ElseFired { bindings: Bindings::new() }, substitute(e, &bindings, now)),
                None => (Outcome::ConditionMiss, Vec::new()),
            },
        };
        bindings.retain(|k, _| reportable(k));
        let outcome = match outcome {
            Outcome::Fired { .. } => Outcome::Fired { bindings },
            Outcome::ElseFired { .. } => Outcome::ElseFired { bindings },
            o => o,
        };
        Ok(Plan { outcome, actions, consumed: mark })
    }

    /// Turns instantiated actions into updates, side-effecting attachment
    /// calls and buffered notifications.
    fn prepare(&self, rule: &Sym, actions: &[Literal], now: Timestamp) -> Result<(Vec<Update>, Vec<Notification>), String> {
        let mut updates = Vec::new();
        let mut notes = Vec::new();
        for a in actions {
            let args = &a.atom.args;
            let as_fact = |t: &Term| {
                let f = Literal::from_term(t).ok_or_else(|| format!("`{t}` is not a fact"))?;
                if f.is_ground() {
                    Ok(f)
                } else {
                    Err(format!("`{a}` is not ground"))
                }
            };
            let text = |t: &Term| match t {
                Term::Const(Constant::Text(s) | Constant::Symbol(s)) => Some(s.to_string()),
                _ => None,
            };
            match (&*a.atom.pred, args.as_slice()) {
                ("assert" | "assert_fact", [f]) => {
                    updates.push(Update::AssertFact { module: sym(DYNAMIC_MODULE), fact: as_fact(f)? })
                }
                ("retract" | "retract_fact", [f]) => updates.push(Update::RetractFact { fact: as_fact(f)? }),
                ("notify", [ch, payload]) => notes.push(Notification {
                    t: now,
                    rule: rule.clone(),
                    channel: ch.clone(),
                    payload: payload.clone(),
                }),
                ("add_module", [p]) => {
                    let key = text(p).ok_or_else(|| format!("`{a}`: expected a path"))?;
                    let m = self.library.get(&key).ok_or_else(|| format!("`{a}`: module not loaded"))?;
                    updates.push(Update::AddModule(m.clone()));
                }
                ("remove_module", [id]) => {
                    let id = text(id).ok_or_else(|| format!("`{a}`: expected a module id"))?;
                    updates.push(Update::RemoveModule(sym(&id)));
                }
                (name, _) => {
                    let att = self
                        .kb
                        .registry()
                        .get(name, args.len())
                        .ok_or_else(|| format!("unknown action `{a}`"))?;
                    let inputs: Vec<Term> = att
                        .contract
                        .modes
                        .iter()
                        .zip(args)
                        .filter(|(m, _)| **m == crate::attach::Mode::In)
                        .map(|(_, t)| t.clone())
                        .collect();
                    if !inputs.iter().all(Term::is_ground) {
                        return Err(format!("`{a}`: input arguments must be ground"));
                    }
                    let rows = (att.func)(&inputs).map_err(|e| format!("`{a}`: {e}"))?;
                    if rows.is_empty() {
                        return Err(format!("`{a}` failed"));
                    }
                }
            }
        }
        Ok((updates, notes))
    }

    /// Evaluates the due rules at `now` and commits their actions.
    pub fn tick(&mut self, now: Timestamp) -> Result<&[TickEntry], Error> {
        if let Some(prev) = self.last_tick {
            if now <= prev {
                return Err(Error::TickRegression { now, previous: prev });
            }
        }
        let start = self.log.len();
        let snap = self.kb.clone();
        let due: Vec<usize> = (0..self.rules.len()).filter(|&i| self.due(&self.rules[i], now)).collect();
        let plans: Vec<(usize, Plan)> = due
            .iter()
            .map(|&i| {
                let plan = self.evaluate(&snap, &self.rules[i], now).unwrap_or_else(|e| Plan {
                    outcome: Outcome::Error { message: e.to_string() },
                    actions: Vec::new(),
                    consumed: None,
                });
                (i, plan)
            })
            .collect();
        for (i, mut plan) in plans {
            let id = self.rules[i].id.clone();
            if let Some(c) = plan.consumed.take() {
                self.consumed.entry(id.clone()).or_default().insert(c);
            }
            if plan.outcome.fired() {
                let committed = self.prepare(&id, &plan.actions, now).and_then(|(updates, notes)| {
                    if !updates.is_empty() {
                        self.kb.apply(updates).map_err(|e| e.to_string())?;
                    }
                    Ok(notes)
                });
                match committed {
                    Ok(notes) => self.notifications.extend(notes),
                    Err(message) => plan.outcome = Outcome::Error { message },
                }
            }
            self.last_eval.insert(id.clone(), now);
            self.log.push(TickEntry { t: now, rule: id, outcome: plan.outcome });
        }
        self.ingest_pending = false;
        self.last_tick = Some(now);
        Ok(&self.log[start..])
    }

    /// Interleaves ingestion of `stream` with ticks up to `horizon`. Ticks
    /// happen at every multiple of a rule period and at every event time;
    /// events later than `horizon` are not ingested.
    pub fn run(&mut self, stream: &[(Timestamp, Term)], horizon: Timestamp) -> Result<RunOutcome, Error> {
        let mut ordered: Vec<(usize, Timestamp, Term)> = Vec::with_capacity(stream.len());
        let mut high = self.last_tick.map(|t| t + 1).unwrap_or(0);
        let floor = high;
        for (i, (t, e)) in stream.iter().enumerate() {
            if *t < floor || t.saturating_add(self.config.reorder_window) < high {
                return Err(Error::OutOfOrder { position: i + 1, t: *t, previous: high.max(floor) });
            }
            high = high.max(*t);
            ordered.push((i, *t, e.clone()));
        }
        ordered.sort_by_key(|(i, t, _)| (*t, *i));

        let mut instants: BTreeSet<Timestamp> = ordered.iter().map(|(_, t, _)| *t).filter(|&t| t <= horizon).collect();
        let periods: BTreeSet<u64> = self.rules.iter().filter_map(|r| self.period(r)).map(|p| p.max(1)).collect();
        for p in periods {
            let mut t = p;
            while t <= horizon {
                instants.insert(t);
                t += p;
            }
        }
        if let Some(prev) = self.last_tick {
            instants.retain(|&t| t > prev);
        }

        let mut out = RunOutcome::default();
        let mut next = 0;
        for now in instants {
            let from = next;
            while next < ordered.len() && ordered[next].1 == now {
                next += 1;
            }
            let batch: Vec<(Term, Timestamp)> = ordered[from..next].iter().map(|(_, t, e)| (e.clone(), *t)).collect();
            let clock = Instant::now();
            self.ingest(&batch)?;
            self.tick(now)?;
            if !batch.is_empty() {
                let per = clock.elapsed().as_secs_f64() * 1000.0 / batch.len() as f64;
                out.latencies_ms.extend(std::iter::repeat_n(per, batch.len()));
            }
            out.events += batch.len();
            out.ticks += 1;
        }
        Ok(out)
    }
}

/// One tick over `kb` with fresh engine state.
pub fn tick(kb: &KnowledgeBase, rules: &[EcaRule], now: Timestamp) -> Result<(KnowledgeBase, Vec<TickEntry>), Error> {
    let mut engine = EcaEngine::new(kb.clone(), rules.to_vec());
    let log = engine.tick(now)?.to_vec();
    Ok((engine.into_kb(), log))
}
