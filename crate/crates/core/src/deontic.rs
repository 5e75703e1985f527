//! Deontic norms: obligations, prohibitions and permissions with deadlines,
//! violations and contrary-to-duty reparations.
//!
//! A norm is anchored at the instant its trigger is detected (or at its
//! parent's violation, for a reparation) and is active from the next instant
//! on; a norm with no trigger that is nobody's reparation is active from 0.
//! Relative deadlines count from the anchor and are inclusive: fulfilment at
//! the deadline instant counts, and an unfulfilled obligation is violated at
//! that instant. Waivers are `+∂ waived(Id)` conclusions of the defeasible
//! layer over the narrative known at the time.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::defeasible::{prove_in_kb, ProofTag, Verdict};
use crate::error::Error;
use crate::event::{detect, holds_at, narrative, truncate_narrative, EventExpr};
use crate::kb::{fact, KnowledgeBase, RuleModule};
use crate::term::{sym, Sym, Term};
use crate::wfs::TruthValue;
use crate::Timestamp;

pub const DEONTIC_STATE_MODULE: &str = "deontic_state";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    Obligation,
    Prohibition,
    Permission,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Obligation => "obligation",
            NormKind::Prohibition => "prohibition",
            NormKind::Permission => "permission",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "obligation" => Some(NormKind::Obligation),
            "prohibition" => Some(NormKind::Prohibition),
            "permission" => Some(NormKind::Permission),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Deadline {
    /// Milliseconds after activation.
    Relative(u64),
    Absolute(u64),
    /// No deadline; only violated by an explicit `neg` occurrence of the target.
    Standing,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Norm {
    pub id: Sym,
    pub kind: NormKind,
    pub bearer: Term,
    /// `detect(expr)`, an event pattern, or `holds_at(fluent)`; `None` means active from time 0.
    pub trigger: Option<Term>,
    pub target: Term,
    pub deadline: Option<Deadline>,
    pub reparation: Option<Sym>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormStatus {
    Inactive,
    Active,
    Fulfilled,
    Violated,
    Waived,
}

impl NormStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NormStatus::Inactive => "inactive",
            NormStatus::Active => "active",
            NormStatus::Fulfilled => "fulfilled",
            NormStatus::Violated => "violated",
            NormStatus::Waived => "waived",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, NormStatus::Fulfilled | NormStatus::Violated | NormStatus::Waived)
    }
}

/// Status of a norm at some instant, and the instant it was entered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NormState {
    pub status: NormStatus,
    pub since: Timestamp,
}

impl fmt::Display for NormState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.status.as_str(), self.since)
    }
}

/// How a trigger or target is observed.
enum Probe {
    Event(EventExpr),
    Fluent(Term),
}

fn probe(t: &Term) -> Result<Probe, Error> {
    match t.as_app() {
        Some((f, [e])) if &**f == "detect" => Ok(Probe::Event(EventExpr::from_term(e)?)),
        Some((f, [fl])) if &**f == "holds_at" => Ok(Probe::Fluent(fl.clone())),
        _ => Ok(Probe::Event(EventExpr::from_term(t)?)),
    }
}

fn bind(t: &Term, bindings: &BTreeMap<Sym, Term>) -> Term {
    t.map_vars(&mut |v| bindings.get(&v.name).cloned().unwrap_or_else(|| Term::Var(v.clone())))
}

/// Evaluates every norm of one knowledge base at one instant.
struct Evaluator<'a> {
    kb: &'a KnowledgeBase,
    now: Timestamp,
    /// Instants at which fluents may change, ascending.
    instants: Vec<Timestamp>,
    parents: HashMap<Sym, Vec<Sym>>,
    states: HashMap<Sym, NormState>,
    waivers: bool,
}

impl<'a> Evaluator<'a> {
    fn new(kb: &'a KnowledgeBase, now: Timestamp) -> Self {
        let mut parents: HashMap<Sym, Vec<Sym>> = HashMap::new();
        for n in kb.norms() {
            if let Some(r) = &n.reparation {
                parents.entry(r.clone()).or_default().push(n.id.clone());
            }
        }
        let mut instants: Vec<Timestamp> =
            std::iter::once(0).chain(narrative(kb).into_iter().map(|(_, t)| t + 1)).filter(|&t| t <= now).collect();
        instants.sort_unstable();
        instants.dedup();
        let waivers = kb.modules().any(|m| {
            m.facts.iter().chain(m.rules.iter().map(|r| &r.head)).any(|h| &*h.atom.pred == "waived" && h.atom.arity() == 1)
        });
        Evaluator { kb, now, instants, parents, states: HashMap::new(), waivers }
    }

    /// First observation of `p` at or after `from` and no later than `until`,
    /// with the bindings it produced.
    fn first(&self, p: &Probe, from: Timestamp, until: Timestamp) -> Result<Option<(Timestamp, BTreeMap<Sym, Term>)>, Error> {
        let until = until.min(self.now);
        if from > until {
            return Ok(None);
        }
        match p {
            Probe::Event(e) => Ok(detect(self.kb, e, Some(until))?
                .into_iter()
                .find(|d| d.end >= from)
                .map(|d| (d.end, d.bindings))),
            Probe::Fluent(f) => {
                let probes = std::iter::once(from).chain(self.instants.iter().copied().filter(|&t| t > from && t <= until));
                for t in probes {
                    if holds_at(self.kb, f, t)? == TruthValue::True {
                        return Ok(Some((t, BTreeMap::new())));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Earliest instant in `[from, until]` at which `waived(id)` is defeasibly provable.
    fn waiver(&self, id: &Sym, from: Timestamp, until: Timestamp) -> Result<Option<Timestamp>, Error> {
        let until = until.min(self.now);
        if !self.waivers || from > until {
            return Ok(None);
        }
        let goal = fact("waived", vec![Term::Const(crate::term::Constant::Symbol(id.clone()))]);
        let mut candidates: Vec<Timestamp> = std::iter::once(from)
            .chain(narrative(self.kb).into_iter().map(|(_, t)| t).filter(|&t| t > from && t <= until))
            .collect();
        candidates.dedup();
        for c in candidates {
            let slice = truncate_narrative(self.kb, c)?;
            if prove_in_kb(&slice, &goal, ProofTag::PlusPartial)? == Verdict::Yes {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// Anchor instant, whether the anchor itself is already active, and trigger bindings.
    fn anchor(&mut self, n: &Norm) -> Result<Option<(Timestamp, bool, BTreeMap<Sym, Term>)>, Error> {
        let mut best: Option<(Timestamp, bool, BTreeMap<Sym, Term>)> = None;
        let mut offer = |cand: (Timestamp, bool, BTreeMap<Sym, Term>)| {
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                best = Some(cand);
            }
        };
        let parents = self.parents.get(&n.id).cloned().unwrap_or_default();
        for p in &parents {
            let st = self.state(p)?;
            if st.status == NormStatus::Violated {
                offer((st.since, false, BTreeMap::new()));
            }
        }
        match &n.trigger {
            Some(t) => {
                if let Some((at, b)) = self.first(&probe(t)?, 0, self.now)? {
                    offer((at, false, b));
                }
            }
            None if parents.is_empty() => offer((0, true, BTreeMap::new())),
            None => {}
        }
        Ok(best)
    }

    fn state(&mut self, id: &Sym) -> Result<NormState, Error> {
        if let Some(s) = self.states.get(id) {
            return Ok(*s);
        }
        let n = self.kb.norm(id).ok_or_else(|| Error::UnknownNorm(id.to_string()))?.clone();
        let s = self.compute(&n)?;
        self.states.insert(id.clone(), s);
        Ok(s)
    }

    fn compute(&mut self, n: &Norm) -> Result<NormState, Error> {
        let inactive = NormState { status: NormStatus::Inactive, since: 0 };
        let Some((anchor, inclusive, bindings)) = self.anchor(n)? else {
            return Ok(inactive);
        };
        let start = if inclusive { anchor } else { anchor + 1 };
        if start > self.now {
            return Ok(inactive);
        }
        let active = NormState { status: NormStatus::Active, since: start };
        if n.kind == NormKind::Permission {
            return Ok(active);
        }
        let deadline = match n.deadline {
            Some(Deadline::Relative(d)) => Some(anchor.saturating_add(d).max(start)),
            Some(Deadline::Absolute(d)) => Some(d.max(start)),
            Some(Deadline::Standing) | None => None,
        };
        let until = deadline.unwrap_or(Timestamp::MAX);
        let target = probe(&bind(&n.target, &bindings))?;
        let hit = self.first(&target, start, until)?.map(|(t, _)| t);
        let waived = self.waiver(&n.id, start, until)?;
        // Candidate terminal transitions; on ties fulfilment beats waiver beats violation.
        let mut events: Vec<(Timestamp, NormStatus)> = Vec::new();
        match n.kind {
            NormKind::Obligation => {
                if let Some(t) = hit {
                    events.push((t, NormStatus::Fulfilled));
                }
                match deadline {
                    Some(d) => events.push((d, NormStatus::Violated)),
                    None => {
                        let refusal = match &target {
                            Probe::Event(EventExpr::Primitive(p)) => Some(Probe::Event(EventExpr::Primitive(Term::app("neg", vec![p.clone()])))),
                            _ => None,
                        };
                        if let Some(r) = refusal {
                            if let Some((t, _)) = self.first(&r, start, until)? {
                                events.push((t, NormStatus::Violated));
                            }
                        }
                    }
                }
            }
            NormKind::Prohibition => {
                if let Some(t) = hit {
                    events.push((t, NormStatus::Violated));
                }
                if let Some(d) = deadline {
                    events.push((d, NormStatus::Fulfilled));
                }
            }
            NormKind::Permission => unreachable!("handled above"),
        }
        if let Some(w) = waived {
            events.push((w, NormStatus::Waived));
        }
        let rank = |s: NormStatus| match s {
            NormStatus::Fulfilled => 0,
            NormStatus::Waived => 1,
            _ => 2,
        };
        // A prohibition breached at its deadline instant is violated, not fulfilled.
        let rank_for = |s: NormStatus| if n.kind == NormKind::Prohibition && s == NormStatus::Violated { 0 } else { rank(s) + 1 };
        events.retain(|(t, _)| *t <= self.now);
        events.sort_by_key(|&(t, s)| (t, rank_for(s)));
        Ok(match events.first() {
            Some(&(t, status)) => NormState { status, since: t },
            None => active,
        })
    }
}

/// State of norm `id` at instant `t`.
pub fn norm_state(kb: &KnowledgeBase, id: &str, t: Timestamp) -> Result<NormState, Error> {
    Evaluator::new(kb, t).state(&sym(id))
}

/// States of all norms at instant `t`, by id.
pub fn norm_states(kb: &KnowledgeBase, t: Timestamp) -> Result<BTreeMap<Sym, NormState>, Error> {
    let mut ev = Evaluator::new(kb, t);
    let ids: Vec<Sym> = kb.norms().map(|n| n.id.clone()).collect();
    ids.into_iter().map(|id| ev.state(&id).map(|s| (id, s))).collect()
}

/// Norms violated at or before `t`, by violation time then id.
pub fn violations(kb: &KnowledgeBase, t: Timestamp) -> Result<Vec<(Sym, Timestamp)>, Error> {
    let mut out: Vec<(Sym, Timestamp)> = norm_states(kb, t)?
        .into_iter()
        .filter(|(_, s)| s.status == NormStatus::Violated)
        .map(|(id, s)| (id, s.since))
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Norm states at `t` as facts: `norm_state(Id, Status, Since)` plus
/// `norm_active(Id)`, `norm_fulfilled(Id, T)`, `norm_violated(Id, T)` and
/// `norm_waived(Id, T)`.
pub fn materialize_state(kb: &KnowledgeBase, t: Timestamp) -> Result<RuleModule, Error> {
    let mut m = RuleModule::new(DEONTIC_STATE_MODULE);
    for (id, s) in norm_states(kb, t)? {
        let idt = Term::Const(crate::term::Constant::Symbol(id));
        let since = Term::int(s.since as i64);
        m.facts.push(fact("norm_state", vec![idt.clone(), Term::symbol(s.status.as_str()), since.clone()]));
        match s.status {
            NormStatus::Inactive => {}
            NormStatus::Active => m.facts.push(fact("norm_active", vec![idt])),
            other => m.facts.push(fact(&format!("norm_{}", other.as_str()), vec![idt, since])),
        }
    }
    Ok(m)
}
