//! Forward sweep over the narrative; the reference for `holds_at`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::EventError;
use crate::kb::KnowledgeBase;
use crate::term::{Literal, Term, Var};
use crate::unify::{Subst, Unifier};
use crate::Timestamp;

/// Inclusive range of instants at which a fluent holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Timestamp,
    pub hi: Timestamp,
}

impl Interval {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.lo <= t && t <= self.hi
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Timeline {
    pub horizon: Timestamp,
    pub fluents: BTreeMap<Term, Vec<Interval>>,
}

impl Timeline {
    pub fn intervals(&self, fluent: &Term) -> &[Interval] {
        self.fluents.get(fluent).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn holds(&self, fluent: &Term, t: Timestamp) -> bool {
        self.intervals(fluent).iter().any(|i| i.contains(t))
    }
}

/// Unconditional effect axioms by predicate.
struct Effects {
    initiates: Vec<Literal>,
    terminates: Vec<Literal>,
    initially: Vec<Term>,
}

fn effects(kb: &KnowledgeBase) -> Result<Effects, EventError> {
    let mut fx = Effects { initiates: Vec::new(), terminates: Vec::new(), initially: Vec::new() };
    let heads = kb.modules().flat_map(|m| {
        m.facts.iter().map(|f| (f, true)).chain(
            m.rules
                .iter()
                .filter(|r| r.kind == crate::term::RuleKind::Strict)
                .map(|r| (&r.head, r.body.iter().all(Literal::is_true_builtin))),
        )
    });
    for (head, unconditional) in heads {
        if head.neg {
            continue;
        }
        let slot = match (&*head.atom.pred, head.atom.arity()) {
            ("initiates", 3) => &mut fx.initiates,
            ("terminates", 3) => &mut fx.terminates,
            ("initially", 1) => {
                if !unconditional {
                    return Err(EventError::ConditionalEffect(head.to_string()));
                }
                if !head.is_ground() {
                    return Err(EventError::NonGroundEffect(head.to_string()));
                }
                fx.initially.push(head.atom.args[0].clone());
                continue;
            }
            _ => continue,
        };
        if !unconditional {
            return Err(EventError::ConditionalEffect(head.to_string()));
        }
        slot.push(head.clone());
    }
    Ok(fx)
}

/// Fluents affected by `event` at `t` through `axioms`.
fn affected(unifier: &Unifier, axioms: &[Literal], event: &Term, t: Timestamp) -> Result<Vec<Term>, EventError> {
    let fluent = Term::Var(Var { scope: u32::MAX, ..Var::new("F") });
    let mut out = Vec::new();
    for ax in axioms {
        let mut s = Subst::new();
        let args = [event.clone(), fluent.clone(), Term::int(t as i64)];
        if ax.atom.args.iter().zip(&args).all(|(a, b)| unifier.unify_in(a, b, &mut s)) {
            let f = s.resolve(&fluent);
            if !f.is_ground() {
                return Err(EventError::NonGroundEffect(format!("{ax} for happens({event}, {t})")));
            }
            out.push(f);
        }
    }
    Ok(out)
}

/// Holding intervals of every fluent up to `horizon`, from the ground
/// `happens/2` facts and the unconditional effect axioms of `kb`.
pub fn simulate_timeline(kb: &KnowledgeBase, horizon: Timestamp) -> Result<Timeline, EventError> {
    let fx = effects(kb)?;
    let unifier = Unifier::new(kb.types());
    // fluent -> instant -> (initiated, terminated)
    let mut changes: BTreeMap<Term, BTreeMap<Timestamp, (bool, bool)>> = BTreeMap::new();
    for (event, t) in super::narrative(kb) {
        if t > horizon {
            continue;
        }
        for f in affected(&unifier, &fx.initiates, &event, t)? {
            changes.entry(f).or_default().entry(t).or_default().0 = true;
        }
        for f in affected(&unifier, &fx.terminates, &event, t)? {
            changes.entry(f).or_default().entry(t).or_default().1 = true;
        }
    }
    let initially: BTreeSet<Term> = fx.initially.into_iter().collect();
    for f in &initially {
        changes.entry(f.clone()).or_default();
    }

    let mut timeline = Timeline { horizon, fluents: BTreeMap::new() };
    for (fluent, steps) in changes {
        let mut intervals = Vec::new();
        let mut open: Option<Timestamp> = initially.contains(&fluent).then_some(0);
        for (t, (init, term)) in steps {
            match open {
                Some(lo) if term => {
                    intervals.push(Interval { lo, hi: t });
                    open = None;
                }
                None if init && !term && t < horizon => open = Some(t + 1),
                _ => {}
            }
        }
        if let Some(lo) = open {
            intervals.push(Interval { lo, hi: horizon });
        }
        if !intervals.is_empty() {
            timeline.fluents.insert(fluent, intervals);
        }
    }
    Ok(timeline)
}
