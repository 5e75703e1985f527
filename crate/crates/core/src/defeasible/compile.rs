//! Translation of a theory into a Horn meta-program over the ground theory.
//!
//! Each proof tag becomes a predicate over encoded literals (`p(a)` or
//! `neg(p(a))`): `definitely`, `not_definitely`, `defeasibly` and
//! `not_defeasibly`. Rule instances are numbered and the universal conditions
//! of the inference rules are unfolded into auxiliary `dl_*` predicates, so
//! the least model (which is the well-founded model of a Horn program)
//! carries exactly the provable tags.

use super::ground::GroundRule;
use super::DefeasibleTheory;
use crate::error::DefeasibleError;
use crate::kb::{KnowledgeBase, RuleModule};
use crate::term::{Atom, Literal, Rule, RuleKind, Term};

fn meta(pred: &str, args: Vec<Term>) -> Literal {
    Literal::pos(Atom::new(pred, args))
}

fn inst(i: usize) -> Term {
    Term::int(i as i64)
}

/// Compiles `theory` into module `id`, grounding against `kb`'s attachments.
pub fn compile(theory: &DefeasibleTheory, id: &str, kb: &KnowledgeBase) -> Result<RuleModule, DefeasibleError> {
    let g = theory.ground_in(kb)?;
    let mut m = RuleModule::new(id);
    let lit = |l: usize| g.literals[l].to_term();
    let tag = |p: &str, l: usize| meta(p, vec![lit(l)]);
    let aux = |p: &str, args: &[usize]| meta(p, args.iter().map(|&i| inst(i)).collect());
    let rule = |head: Literal, body: Vec<Literal>| Rule::strict(head, body);

    let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); g.literal_count()];
    for (i, r) in g.rules.iter().enumerate() {
        by_head[r.head].push(i);
    }
    let supportive = |r: &GroundRule| r.kind != RuleKind::Defeater;

    for (i, r) in g.rules.iter().enumerate() {
        // Applicability and discarding of every instance.
        m.rules.push(rule(aux("dl_applicable", &[i]), r.body.iter().map(|&a| tag("defeasibly", a)).collect()));
        for &a in &r.body {
            m.rules.push(rule(aux("dl_discarded", &[i]), vec![tag("not_defeasibly", a)]));
        }
        if r.kind == RuleKind::Strict {
            m.rules.push(rule(tag("definitely", r.head), r.body.iter().map(|&a| tag("definitely", a)).collect()));
            for &a in &r.body {
                m.rules.push(rule(aux("dl_strict_blocked", &[i]), vec![tag("not_definitely", a)]));
            }
        }
        if !supportive(r) {
            continue;
        }
        let attackers = &by_head[g.complement(r.head)];
        // +∂ via instance i: applicable, -Δ of the complement, every attacker countered.
        let mut body = vec![aux("dl_applicable", &[i]), tag("not_definitely", g.complement(r.head))];
        for &s in attackers {
            body.push(aux("dl_countered", &[i, s]));
            if g.beats(r, &g.rules[s]) {
                m.facts.push(aux("dl_countered", &[i, s]));
            } else {
                m.rules.push(rule(aux("dl_countered", &[i, s]), vec![aux("dl_discarded", &[s])]));
                m.rules.push(rule(aux("dl_refuted", &[i]), vec![aux("dl_applicable", &[s])]));
            }
        }
        m.rules.push(rule(tag("defeasibly", r.head), body));
        m.rules.push(rule(aux("dl_refuted", &[i]), vec![aux("dl_discarded", &[i])]));
    }

    for q in 0..g.literal_count() {
        if g.facts.contains(&q) {
            m.facts.push(tag("definitely", q));
        } else {
            let blocked = by_head[q]
                .iter()
                .filter(|&&i| g.rules[i].kind == RuleKind::Strict)
                .map(|&i| aux("dl_strict_blocked", &[i]))
                .collect();
            m.rules.push(rule(tag("not_definitely", q), blocked));
        }
        m.rules.push(rule(tag("defeasibly", q), vec![tag("definitely", q)]));
        let nq = g.complement(q);
        m.rules.push(rule(tag("not_defeasibly", q), vec![tag("not_definitely", q), tag("definitely", nq)]));
        let mut body = vec![tag("not_definitely", q)];
        body.extend(by_head[q].iter().filter(|&&i| supportive(&g.rules[i])).map(|&i| aux("dl_refuted", &[i])));
        m.rules.push(rule(tag("not_defeasibly", q), body));
    }
    // Empty bodies print as facts-with-`true`; keep them as facts instead.
    let (facts, rules): (Vec<Rule>, Vec<Rule>) = m.rules.drain(..).partition(|r| r.body.is_empty());
    m.facts.extend(facts.into_iter().map(|r| r.head));
    m.rules = rules;
    m.facts.sort();
    m.facts.dedup();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defeasible::{Conclusions, ProofTag};
    use crate::lang::{parse_program, parse_query};
    use crate::wfs::{truth_of, TruthValue};

    fn compiled(src: &str) -> (DefeasibleTheory, KnowledgeBase) {
        let t = DefeasibleTheory::from_modules([&parse_program(src, "t").unwrap().module]).unwrap();
        let mut kb = KnowledgeBase::with_standard_library();
        let m = compile(&t, "dl", &kb).unwrap();
        kb.add_module(m).unwrap();
        (t, kb)
    }

    fn truth(kb: &KnowledgeBase, q: &str) -> TruthValue {
        truth_of(kb, &parse_query(q).unwrap()[0]).unwrap()
    }

    #[test]
    fn tweety_compiles() {
        let (_, kb) = compiled(
            "bird(X) :- penguin(X). r2: flies(X) := bird(X). r3: neg flies(X) := penguin(X). overrides(r3, r2). penguin(tweety).",
        );
        assert_eq!(truth(&kb, "defeasibly(neg(flies(tweety)))"), TruthValue::True);
        assert_eq!(truth(&kb, "defeasibly(flies(tweety))"), TruthValue::False);
        assert_eq!(truth(&kb, "not_defeasibly(flies(tweety))"), TruthValue::True);
    }

    #[test]
    fn empty_theory_derives_nothing() {
        let (_, kb) = compiled("");
        assert_eq!(kb.module("dl").map(|m| m.rules.len() + m.facts.len()), Some(0));
    }

    #[test]
    fn strict_fact_is_defeasible() {
        let (_, kb) = compiled("p.");
        assert_eq!(truth(&kb, "defeasibly(p)"), TruthValue::True);
    }

    #[test]
    fn loops_match_the_proof_theory() {
        let src = "p := p. q := not_a_fact. neg q := true. a :- a. neg b := a.";
        let (t, kb) = compiled(src);
        let g = t.ground().unwrap();
        let c = Conclusions::compute(&g);
        for l in g.literals() {
            for (tag, pred) in [(ProofTag::PlusPartial, "defeasibly"), (ProofTag::MinusPartial, "not_defeasibly")] {
                let q = Literal::pos(Atom::new(pred, vec![l.to_term()]));
                let expected = if c.holds(tag, g.id(l).unwrap()) { TruthValue::True } else { TruthValue::False };
                assert_eq!(truth_of(&kb, &q).unwrap(), expected, "{q}");
            }
        }
    }
}
