//! Event calculus over `happens/2` narratives, and an event algebra for
//! composing primitive occurrences into complex events.
//!
//! A fluent initiated at `t1` holds on `(t1, t2]` where `t2` is the next
//! terminating event; termination wins when both happen at the same instant.

mod algebra;
mod timeline;

pub use algebra::{detect, Detection, EventExpr, Window};
pub use timeline::{simulate_timeline, Interval, Timeline};

use std::sync::OnceLock;

use crate::error::{EventError, KbError};
use crate::kb::{KnowledgeBase, RuleModule, Update, NARRATIVE_MODULE};
use crate::term::{Atom, Literal, Term};
use crate::wfs::{truth_of, TruthValue};
use crate::Timestamp;

pub const EC_AXIOMS_MODULE: &str = "ec_axioms";

const EC_AXIOMS: &str = "
holds_at(F, T) :- initially(F), not clipped(0, F, T).
holds_at(F, T) :- happens(E, T1), lessThan(T1, T), initiates(E, F, T1), not clipped(T1, F, T).
clipped(T1, F, T2) :- happens(E, T), lessEq(T1, T), lessThan(T, T2), terminates(E, F, T).
";

/// The simple event calculus as a rule module.
pub fn ec_axioms() -> RuleModule {
    static AXIOMS: OnceLock<RuleModule> = OnceLock::new();
    AXIOMS
        .get_or_init(|| {
            let mut m = crate::lang::parse_program(EC_AXIOMS, EC_AXIOMS_MODULE).expect("axioms parse").module;
            m.id = crate::term::sym(EC_AXIOMS_MODULE);
            m
        })
        .clone()
}

/// Loads the standard attachments and the axiom module unless present.
pub fn ensure_ec_axioms(kb: &mut KnowledgeBase) -> Result<(), KbError> {
    kb.ensure_standard_library()?;
    if !kb.contains_module(EC_AXIOMS_MODULE) {
        kb.add_module(ec_axioms())?;
    }
    Ok(())
}

/// `happens(event, t)`.
pub fn happens(event: Term, t: Timestamp) -> Literal {
    Literal::pos(Atom::new("happens", vec![event, Term::int(t as i64)]))
}

/// Reads a ground `happens(E, T)` fact.
pub fn as_occurrence(l: &Literal) -> Option<(&Term, Timestamp)> {
    if l.neg || l.naf || &*l.atom.pred != "happens" || l.atom.arity() != 2 || !l.is_ground() {
        return None;
    }
    let t = l.atom.args[1].as_integer()?;
    (t >= 0).then(|| (&l.atom.args[0], t as Timestamp))
}

/// All ground occurrences in the knowledge base, ordered by time then event.
pub fn narrative(kb: &KnowledgeBase) -> Vec<(Term, Timestamp)> {
    let mut out: Vec<(Term, Timestamp)> =
        kb.facts().filter_map(as_occurrence).map(|(e, t)| (e.clone(), t)).collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out.dedup();
    out
}

/// Appends occurrences to the narrative module in one transaction.
pub fn record_events(kb: &mut KnowledgeBase, events: &[(Term, Timestamp)]) -> Result<(), KbError> {
    if events.is_empty() {
        return Ok(());
    }
    let updates = events
        .iter()
        .map(|(e, t)| Update::AssertFact { module: crate::term::sym(NARRATIVE_MODULE), fact: happens(e.clone(), *t) })
        .collect();
    kb.apply(updates).map(|_| ())
}

/// A copy of `kb` without occurrences later than `t`.
pub fn truncate_narrative(kb: &KnowledgeBase, t: Timestamp) -> Result<KnowledgeBase, KbError> {
    let late: Vec<Update> = kb
        .modules()
        .flat_map(|m| m.facts.iter())
        .filter(|f| as_occurrence(f).is_some_and(|(_, ft)| ft > t))
        .map(|f| Update::RetractFact { fact: f.clone() })
        .collect();
    let mut out = kb.clone();
    if !late.is_empty() {
        out.apply(late)?;
    }
    Ok(out)
}

/// Truth of `holds_at(fluent, t)` in the well-founded model.
pub fn holds_at(kb: &KnowledgeBase, fluent: &Term, t: Timestamp) -> Result<TruthValue, EventError> {
    let q = Literal::pos(Atom::new("holds_at", vec![fluent.clone(), Term::int(t as i64)]));
    if kb.contains_module(EC_AXIOMS_MODULE) && kb.registry().contains("lessThan", 2) {
        return Ok(truth_of(kb, &q)?);
    }
    let mut kb = kb.clone();
    ensure_ec_axioms(&mut kb)?;
    Ok(truth_of(&kb, &q)?)
}
