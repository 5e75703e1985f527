//! Defeasible logic with proof tags ±Δ (definite) and ±∂ (defeasible).
//!
//! The variant is ambiguity blocking without team defeat: a rule for `q`
//! establishes `+∂q` only if it beats every applicable attacker itself.
//! Conflicts are complementary literals `p` / `neg p`; defeaters may block
//! a conclusion but never support one.

mod compile;
mod ground;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

pub use compile::compile;
pub use ground::{GroundTheory, MAX_GROUND_RULES};

use crate::error::DefeasibleError;
use crate::kb::{KnowledgeBase, RuleModule};
use crate::term::{Literal, PredKey, Rule, RuleKind, Sym};
use ground::LitId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProofTag {
    /// `+Δ`: definitely provable from facts and strict rules.
    PlusDelta,
    /// `-Δ`: definite proof shown to be impossible.
    MinusDelta,
    /// `+∂`: defeasibly provable.
    PlusPartial,
    /// `-∂`: defeasible proof shown to be impossible.
    MinusPartial,
}

impl ProofTag {
    pub fn opposite(self) -> Self {
        match self {
            ProofTag::PlusDelta => ProofTag::MinusDelta,
            ProofTag::MinusDelta => ProofTag::PlusDelta,
            ProofTag::PlusPartial => ProofTag::MinusPartial,
            ProofTag::MinusPartial => ProofTag::PlusPartial,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+D" | "+Δ" | "+delta" => Some(ProofTag::PlusDelta),
            "-D" | "-Δ" | "-delta" => Some(ProofTag::MinusDelta),
            "+d" | "+∂" | "+partial" => Some(ProofTag::PlusPartial),
            "-d" | "-∂" | "-partial" => Some(ProofTag::MinusPartial),
            _ => None,
        }
    }
}

impl fmt::Display for ProofTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofTag::PlusDelta => "+Δ",
            ProofTag::MinusDelta => "-Δ",
            ProofTag::PlusPartial => "+∂",
            ProofTag::MinusPartial => "-∂",
        })
    }
}

/// Outcome of [`prove`]: the tag is derivable, its opposite is, or neither (loops).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    NotDerivable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::NotDerivable => "not-derivable",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefeasibleTheory {
    pub facts: Vec<Literal>,
    /// Strict, defeasible and defeater rules.
    pub rules: Vec<Rule>,
    /// `(winner, loser)` label pairs.
    pub superiority: Vec<(Sym, Sym)>,
}

impl DefeasibleTheory {
    pub fn new(facts: Vec<Literal>, rules: Vec<Rule>, superiority: Vec<(Sym, Sym)>) -> Result<Self, DefeasibleError> {
        let t = DefeasibleTheory { facts, rules, superiority };
        t.validate()?;
        Ok(t)
    }

    /// Everything in the given modules.
    pub fn from_modules<'a>(modules: impl IntoIterator<Item = &'a RuleModule>) -> Result<Self, DefeasibleError> {
        let mut t = DefeasibleTheory::default();
        for m in modules {
            t.facts.extend(m.facts.iter().cloned());
            t.rules.extend(m.rules.iter().cloned());
            t.superiority.extend(m.priorities.iter().cloned());
        }
        t.validate()?;
        Ok(t)
    }

    /// The defeasible part of a knowledge base: all defeasible rules and
    /// defeaters, plus the strict rules and facts they (or `seeds`) depend on.
    /// Priorities naming labels absent from the theory are skipped; the
    /// knowledge base reports them as warnings when modules are removed.
    pub fn from_kb(kb: &KnowledgeBase, seeds: &[Literal]) -> Result<Self, DefeasibleError> {
        let mut t = DefeasibleTheory::default();
        let mut wanted: Vec<PredKey> = Vec::new();
        let mut seen: HashSet<PredKey> = HashSet::new();
        let mut want = |k: PredKey, wanted: &mut Vec<PredKey>| {
            for k in [k.clone(), PredKey { neg: !k.neg, ..k }] {
                if seen.insert(k.clone()) {
                    wanted.push(k);
                }
            }
        };
        for l in seeds {
            want(l.pred_key(), &mut wanted);
        }
        for m in kb.modules() {
            for r in m.rules.iter().filter(|r| r.kind != RuleKind::Strict) {
                t.rules.push(r.clone());
                want(r.head.pred_key(), &mut wanted);
                r.body.iter().for_each(|b| want(b.pred_key(), &mut wanted));
            }
        }
        while let Some(k) = wanted.pop() {
            for m in kb.modules() {
                t.facts.extend(m.facts.iter().filter(|f| f.pred_key() == k).cloned());
                for r in m.rules.iter().filter(|r| r.kind == RuleKind::Strict && r.head.pred_key() == k) {
                    t.rules.push(r.clone());
                    r.body.iter().for_each(|b| want(b.pred_key(), &mut wanted));
                }
            }
        }
        let labels: HashSet<&Sym> = t.rules.iter().filter_map(|r| r.label.as_ref()).collect();
        t.superiority = kb
            .modules()
            .flat_map(|m| m.priorities.iter())
            .filter(|(w, l)| labels.contains(w) && labels.contains(l))
            .cloned()
            .collect();
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), DefeasibleError> {
        for r in &self.rules {
            if let Some(l) = r.body.iter().find(|l| l.naf) {
                return Err(DefeasibleError::NafInTheory(format!("{l} in `{r}`")));
            }
        }
        let labels: HashSet<&Sym> = self.rules.iter().filter_map(|r| r.label.as_ref()).collect();
        let mut edges: HashMap<&Sym, Vec<&Sym>> = HashMap::new();
        for (w, l) in &self.superiority {
            for x in [w, l] {
                if !labels.contains(x) {
                    return Err(DefeasibleError::UnknownLabel(x.to_string()));
                }
            }
            edges.entry(w).or_default().push(l);
        }
        // Depth-first search for a back edge.
        let mut state: HashMap<&Sym, u8> = HashMap::new();
        fn visit<'a>(
            n: &'a Sym,
            edges: &HashMap<&'a Sym, Vec<&'a Sym>>,
            state: &mut HashMap<&'a Sym, u8>,
        ) -> Result<(), DefeasibleError> {
            match state.get(n) {
                Some(1) => return Err(DefeasibleError::CyclicSuperiority(n.to_string())),
                Some(_) => return Ok(()),
                None => {}
            }
            state.insert(n, 1);
            for m in edges.get(n).into_iter().flatten() {
                visit(m, edges, state)?;
            }
            state.insert(n, 2);
            Ok(())
        }
        let roots: BTreeSet<&Sym> = edges.keys().copied().collect();
        for n in roots {
            visit(n, &edges, &mut state)?;
        }
        Ok(())
    }

    /// Grounds the theory with the standard attachment library.
    pub fn ground(&self) -> Result<GroundTheory, DefeasibleError> {
        self.ground_in(&KnowledgeBase::with_standard_library())
    }

    /// Grounds the theory using the attachments and types of `kb`.
    pub fn ground_in(&self, kb: &KnowledgeBase) -> Result<GroundTheory, DefeasibleError> {
        self.validate()?;
        ground::ground(self, kb)
    }
}

/// All four tag sets of a ground theory.
#[derive(Clone, Debug)]
pub struct Conclusions {
    plus_delta: Vec<bool>,
    minus_delta: Vec<bool>,
    plus_partial: Vec<bool>,
    minus_partial: Vec<bool>,
}

impl Conclusions {
    /// Least fixpoint of the inference conditions.
    pub fn compute(g: &GroundTheory) -> Self {
        let n = g.literal_count();
        let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, r) in g.rules.iter().enumerate() {
            by_head[r.head].push(i);
        }
        let mut c = Conclusions {
            plus_delta: vec![false; n],
            minus_delta: vec![false; n],
            plus_partial: vec![false; n],
            minus_partial: vec![false; n],
        };
        let strict = |i: &usize| g.rules[*i].kind == RuleKind::Strict;
        let supportive = |i: &usize| g.rules[*i].kind != RuleKind::Defeater;
        loop {
            let mut changed = false;
            for q in 0..n {
                let nq = g.complement(q);
                if !c.plus_delta[q]
                    && (g.facts.contains(&q)
                        || by_head[q].iter().filter(|i| strict(i)).any(|&i| g.rules[i].body.iter().all(|&a| c.plus_delta[a])))
                {
                    c.plus_delta[q] = true;
                    changed = true;
                }
                if !c.minus_delta[q]
                    && !g.facts.contains(&q)
                    && by_head[q].iter().filter(|i| strict(i)).all(|&i| g.rules[i].body.iter().any(|&a| c.minus_delta[a]))
                {
                    c.minus_delta[q] = true;
                    changed = true;
                }
                let applicable = |c: &Conclusions, i: usize| g.rules[i].body.iter().all(|&a| c.plus_partial[a]);
                let discarded = |c: &Conclusions, i: usize| g.rules[i].body.iter().any(|&a| c.minus_partial[a]);
                if !c.plus_partial[q]
                    && (c.plus_delta[q]
                        || (c.minus_delta[nq]
                            && by_head[q].iter().filter(|i| supportive(i)).any(|&r| {
                                applicable(&c, r)
                                    && by_head[nq]
                                        .iter()
                                        .all(|&s| discarded(&c, s) || g.beats(&g.rules[r], &g.rules[s]))
                            })))
                {
                    c.plus_partial[q] = true;
                    changed = true;
                }
                if !c.minus_partial[q]
                    && c.minus_delta[q]
                    && (c.plus_delta[nq]
                        || by_head[q].iter().filter(|i| supportive(i)).all(|&r| {
                            discarded(&c, r)
                                || by_head[nq].iter().any(|&s| applicable(&c, s) && !g.beats(&g.rules[r], &g.rules[s]))
                        }))
                {
                    c.minus_partial[q] = true;
                    changed = true;
                }
            }
            if !changed {
                return c;
            }
        }
    }

    fn set(&self, tag: ProofTag) -> &[bool] {
        match tag {
            ProofTag::PlusDelta => &self.plus_delta,
            ProofTag::MinusDelta => &self.minus_delta,
            ProofTag::PlusPartial => &self.plus_partial,
            ProofTag::MinusPartial => &self.minus_partial,
        }
    }

    pub(crate) fn holds(&self, tag: ProofTag, id: LitId) -> bool {
        self.set(tag)[id]
    }

    /// Literals carrying `tag`, sorted.
    pub fn literals(&self, g: &GroundTheory, tag: ProofTag) -> Vec<Literal> {
        let mut out: Vec<Literal> =
            self.set(tag).iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| g.literals[i].clone()).collect();
        out.sort();
        out
    }

    pub fn verdict(&self, g: &GroundTheory, literal: &Literal, tag: ProofTag) -> Verdict {
        match g.id(literal) {
            Some(id) if self.holds(tag, id) => Verdict::Yes,
            Some(id) if self.holds(tag.opposite(), id) => Verdict::No,
            Some(_) => Verdict::NotDerivable,
            // A literal the theory never mentions has no rules and is no fact.
            None => match tag {
                ProofTag::MinusDelta | ProofTag::MinusPartial => Verdict::Yes,
                ProofTag::PlusDelta | ProofTag::PlusPartial => Verdict::No,
            },
        }
    }
}

/// Decides `tag` for a ground literal.
pub fn prove(theory: &DefeasibleTheory, literal: &Literal, tag: ProofTag) -> Result<Verdict, DefeasibleError> {
    if !literal.is_ground() || literal.naf {
        return Err(DefeasibleError::NonGround(literal.to_string()));
    }
    let g = theory.ground()?;
    Ok(Conclusions::compute(&g).verdict(&g, literal, tag))
}

/// [`prove`] over the defeasible part of a knowledge base.
pub fn prove_in_kb(kb: &KnowledgeBase, literal: &Literal, tag: ProofTag) -> Result<Verdict, DefeasibleError> {
    if !literal.is_ground() || literal.naf {
        return Err(DefeasibleError::NonGround(literal.to_string()));
    }
    let theory = DefeasibleTheory::from_kb(kb, std::slice::from_ref(literal))?;
    let g = theory.ground_in(kb)?;
    Ok(Conclusions::compute(&g).verdict(&g, literal, tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, parse_query};

    fn theory(src: &str) -> DefeasibleTheory {
        DefeasibleTheory::from_modules([&parse_program(src, "t").unwrap().module]).unwrap()
    }

    fn lit(s: &str) -> Literal {
        parse_query(s).unwrap().remove(0)
    }

    const TWEETY: &str = "
        bird(X) :- penguin(X).
        r2: flies(X) := bird(X).
        r3: neg flies(X) := penguin(X).
        overrides(r3, r2).
        penguin(tweety).
    ";

    #[test]
    fn tweety_does_not_fly() {
        let t = theory(TWEETY);
        assert_eq!(prove(&t, &lit("neg flies(tweety)"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("flies(tweety)"), ProofTag::PlusPartial).unwrap(), Verdict::No);
        assert_eq!(prove(&t, &lit("flies(tweety)"), ProofTag::MinusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("bird(tweety)"), ProofTag::PlusDelta).unwrap(), Verdict::Yes);
    }

    #[test]
    fn without_priority_both_sides_fail() {
        let t = theory(&TWEETY.replace("overrides(r3, r2).", ""));
        for l in ["flies(tweety)", "neg flies(tweety)"] {
            assert_eq!(prove(&t, &lit(l), ProofTag::MinusPartial).unwrap(), Verdict::Yes, "{l}");
        }
    }

    #[test]
    fn single_rule() {
        let t = theory("p := q. q.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusDelta).unwrap(), Verdict::No);
    }

    #[test]
    fn mutual_attack_without_priority() {
        let t = theory("p := true. neg p := true.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::MinusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("neg p"), ProofTag::MinusPartial).unwrap(), Verdict::Yes);
    }

    #[test]
    fn loops_are_not_derivable() {
        let t = theory("p := p.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusPartial).unwrap(), Verdict::NotDerivable);
        let t = theory("p :- p.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusDelta).unwrap(), Verdict::NotDerivable);
    }

    #[test]
    fn defeater_blocks_but_never_supports() {
        let t = theory("r1: p := true. d1: neg p :~ true.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::MinusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("neg p"), ProofTag::MinusPartial).unwrap(), Verdict::Yes);
        let t = theory("r1: p := true. d1: neg p :~ true. overrides(r1, d1).");
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
    }

    #[test]
    fn no_team_defeat() {
        // r1 beats s1 and r2 beats s2, but no single rule beats both attackers.
        let t = theory(
            "r1: p := true. r2: p := true. s1: neg p := true. s2: neg p := true. overrides(r1, s1). overrides(r2, s2).",
        );
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusPartial).unwrap(), Verdict::No);
    }

    #[test]
    fn ambiguity_is_blocked() {
        // q is ambiguous, so the rule for neg p is discarded and p goes through.
        let t = theory("q := true. neg q := true. neg p := q. p := true.");
        assert_eq!(prove(&t, &lit("p"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
    }

    #[test]
    fn unknown_and_cyclic_priorities_are_errors() {
        let m = parse_program("r1: p := true. overrides(r1, r9).", "t").unwrap().module;
        assert_eq!(DefeasibleTheory::from_modules([&m]), Err(DefeasibleError::UnknownLabel("r9".into())));
        let m = parse_program("r1: p := true. r2: neg p := true. overrides(r1, r2). overrides(r2, r1).", "t")
            .unwrap()
            .module;
        assert!(matches!(DefeasibleTheory::from_modules([&m]), Err(DefeasibleError::CyclicSuperiority(_))));
    }

    #[test]
    fn attachments_filter_instances() {
        let t = theory("n(1). n(5). big(X) := n(X), greaterThan(X, 3).");
        assert_eq!(prove(&t, &lit("big(5)"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
        assert_eq!(prove(&t, &lit("big(1)"), ProofTag::PlusPartial).unwrap(), Verdict::No);
    }

    #[test]
    fn kb_theory_takes_the_dependency_cone() {
        let mut kb = KnowledgeBase::with_standard_library();
        let src = "a(1). unrelated :- not a(2). w: ok(X) := a(X).";
        kb.add_module(parse_program(src, "t").unwrap().module).unwrap();
        assert_eq!(prove_in_kb(&kb, &lit("ok(1)"), ProofTag::PlusPartial).unwrap(), Verdict::Yes);
    }
}
