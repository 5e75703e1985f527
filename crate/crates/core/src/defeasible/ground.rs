//! Grounding of a defeasible theory.
//!
//! Rules with variables are instantiated over the literals reachable from the
//! facts through strict and defeasible rules; ground rules are taken as written.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::DefeasibleTheory;
use crate::error::DefeasibleError;
use crate::kb::KnowledgeBase;
use crate::term::{Literal, PredKey, RuleKind, Sym};
use crate::unify::{Subst, Unifier};
use crate::wfs::{call_builtin, is_builtin_or_attachment, is_ready};

pub(crate) type LitId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct GroundRule {
    pub label: Option<Sym>,
    pub kind: RuleKind,
    pub head: LitId,
    pub body: Vec<LitId>,
}

/// A propositional theory: every literal is interned together with its complement.
#[derive(Clone, Debug, Default)]
pub struct GroundTheory {
    pub(crate) literals: Vec<Literal>,
    pub(crate) ids: HashMap<Literal, LitId>,
    pub(crate) facts: HashSet<LitId>,
    pub(crate) rules: Vec<GroundRule>,
    pub(crate) superior: HashSet<(Sym, Sym)>,
}

pub const MAX_GROUND_RULES: usize = 1_000_000;

impl GroundTheory {
    pub(crate) fn intern(&mut self, l: &Literal) -> LitId {
        if let Some(&id) = self.ids.get(l) {
            return id;
        }
        for l in [l.clone(), l.complement()] {
            self.ids.insert(l.clone(), self.literals.len());
            self.literals.push(l);
        }
        self.ids[l]
    }

    pub fn literal_count(&self) -> usize {
        self.literals.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub(crate) fn id(&self, l: &Literal) -> Option<LitId> {
        self.ids.get(l).copied()
    }

    /// Complements are interned in adjacent pairs.
    pub(crate) fn complement(&self, id: LitId) -> LitId {
        id ^ 1
    }

    pub(crate) fn beats(&self, r: &GroundRule, s: &GroundRule) -> bool {
        match (&r.label, &s.label) {
            (Some(a), Some(b)) => self.superior.contains(&(a.clone(), b.clone())),
            _ => false,
        }
    }
}

struct Grounder<'a> {
    kb: &'a KnowledgeBase,
    unifier: Unifier<'a>,
    known: HashMap<PredKey, Vec<Literal>>,
    seen: HashSet<Literal>,
}

impl<'a> Grounder<'a> {
    /// Every substitution making all of `goals` hold against the known literals.
    fn join(&self, goals: &[Literal], s: Subst, out: &mut Vec<Subst>) -> Result<(), DefeasibleError> {
        let goals: Vec<Literal> = goals.iter().map(|g| s.resolve_literal(g)).collect();
        let Some(i) = goals.iter().position(|g| is_ready(self.kb, g)) else {
            if goals.is_empty() {
                out.push(s);
                return Ok(());
            }
            return Err(DefeasibleError::NonGround(goals[0].to_string()));
        };
        let mut rest = goals.clone();
        let goal = rest.remove(i);
        if is_builtin_or_attachment(self.kb, &goal) {
            let rows = call_builtin(self.kb, &self.unifier, &goal)?;
            for row in rows {
                let mut s2 = s.clone();
                s2.extend_from(&row);
                self.join(&rest, s2, out)?;
            }
            return Ok(());
        }
        for cand in self.known.get(&goal.pred_key()).into_iter().flatten() {
            let mut s2 = s.clone();
            if self.unifier.unify_atoms(&goal.atom, &cand.atom, &mut s2) {
                self.join(&rest, s2, out)?;
            }
        }
        Ok(())
    }

    fn add(&mut self, l: Literal) -> bool {
        if self.seen.insert(l.clone()) {
            self.known.entry(l.pred_key()).or_default().push(l);
            true
        } else {
            false
        }
    }
}

/// Grounds `theory`, evaluating attachments and builtins against `kb`'s registry.
pub(crate) fn ground(theory: &DefeasibleTheory, kb: &KnowledgeBase) -> Result<GroundTheory, DefeasibleError> {
    let mut g = Grounder { kb, unifier: Unifier::new(kb.types()), known: HashMap::new(), seen: HashSet::new() };
    for f in &theory.facts {
        if !f.is_ground() {
            return Err(DefeasibleError::NonGround(f.to_string()));
        }
        g.add(f.clone());
    }
    let deriving: Vec<_> = theory.rules.iter().filter(|r| r.kind != RuleKind::Defeater).collect();
    loop {
        let mut fresh = Vec::new();
        for r in &deriving {
            let mut subs = Vec::new();
            g.join(&r.body, Subst::new(), &mut subs)?;
            for s in subs {
                let head = s.resolve_literal(&r.head);
                if !head.is_ground() {
                    return Err(DefeasibleError::NonGround(format!("{} (head of `{}`)", head, r)));
                }
                if !g.seen.contains(&head) {
                    fresh.push(head);
                }
            }
        }
        let mut changed = false;
        for l in fresh {
            changed |= g.add(l);
        }
        if g.seen.len() > MAX_GROUND_RULES {
            return Err(DefeasibleError::GroundingBound(MAX_GROUND_RULES));
        }
        if !changed {
            break;
        }
    }

    let mut out = GroundTheory { superior: theory.superiority.iter().cloned().collect(), ..Default::default() };
    let facts: BTreeSet<&Literal> = theory.facts.iter().collect();
    for f in facts {
        let id = out.intern(f);
        out.facts.insert(id);
    }
    let mut dedupe = HashSet::new();
    for r in &theory.rules {
        let mut subs = Vec::new();
        if r.vars().is_empty() {
            // Ground rules are kept even when their body is unreachable, so
            // that loops stay undecided rather than refuted.
            let builtins: Vec<Literal> = r.body.iter().filter(|l| is_builtin_or_attachment(kb, l)).cloned().collect();
            g.join(&builtins, Subst::new(), &mut subs)?;
        } else {
            g.join(&r.body, Subst::new(), &mut subs)?;
        }
        for s in subs {
            let head = s.resolve_literal(&r.head);
            if !head.is_ground() {
                return Err(DefeasibleError::NonGround(format!("{} (head of `{}`)", head, r)));
            }
            let body: Vec<Literal> = r
                .body
                .iter()
                .map(|l| s.resolve_literal(l))
                .filter(|l| !is_builtin_or_attachment(kb, l))
                .collect();
            let head = out.intern(&head);
            let body: Vec<LitId> = body.iter().map(|l| out.intern(l)).collect();
            let gr = GroundRule { label: r.label.clone(), kind: r.kind, head, body };
            if dedupe.insert(gr.clone()) {
                out.rules.push(gr);
                if out.rules.len() > MAX_GROUND_RULES {
                    return Err(DefeasibleError::GroundingBound(MAX_GROUND_RULES));
                }
            }
        }
    }
    Ok(out)
}
