//! Generators and reference oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use slalog_core::deontic::{Deadline, Norm, NormKind};
use slalog_core::eca::{EcaRule, Schedule};
use slalog_core::lang::Program;
use slalog_core::vnv::{Expectation, TestCase};
use slalog_core::{sym, Atom, Literal, Rule, RuleKind, RuleModule, Term, TruthValue, Var};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Ground normal programs and the alternating fixpoint.

/// `head :- pos, not neg` over atoms `a0 .. a{n-1}`.
#[derive(Clone, Debug)]
pub struct GroundProgram {
    pub atoms: usize,
    pub rules: Vec<(usize, Vec<usize>, Vec<usize>)>,
}

impl GroundProgram {
    pub fn random(rng: &mut ChaCha8Rng, max_atoms: usize, max_rules: usize) -> Self {
        let atoms = rng.gen_range(1..=max_atoms);
        let n_rules = rng.gen_range(0..=max_rules);
        let rules = (0..n_rules)
            .map(|_| {
                let head = rng.gen_range(0..atoms);
                let len = rng.gen_range(0..=3);
                let (mut pos, mut neg) = (Vec::new(), Vec::new());
                for _ in 0..len {
                    let a = rng.gen_range(0..atoms);
                    if rng.gen_bool(0.4) {
                        neg.push(a)
                    } else {
                        pos.push(a)
                    }
                }
                (head, pos, neg)
            })
            .collect();
        GroundProgram { atoms, rules }
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        for (h, pos, neg) in &self.rules {
            let body: Vec<String> =
                pos.iter().map(|a| format!("a{a}")).chain(neg.iter().map(|a| format!("not a{a}"))).collect();
            if body.is_empty() {
                out.push_str(&format!("a{h}.\n"));
            } else {
                out.push_str(&format!("a{h} :- {}.\n", body.join(", ")));
            }
        }
        out
    }

    /// Least model of the reduct with respect to `assumed`.
    fn gamma(&self, assumed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut model = BTreeSet::new();
        loop {
            let before = model.len();
            for (h, pos, neg) in &self.rules {
                if neg.iter().all(|a| !assumed.contains(a)) && pos.iter().all(|a| model.contains(a)) {
                    model.insert(*h);
                }
            }
            if model.len() == before {
                return model;
            }
        }
    }

    /// Well-founded model by the alternating fixpoint.
    pub fn well_founded(&self) -> Vec<TruthValue> {
        let mut t = BTreeSet::new();
        loop {
            let next = self.gamma(&self.gamma(&t));
            if next == t {
                break;
            }
            t = next;
        }
        let possible = self.gamma(&t);
        (0..self.atoms)
            .map(|a| {
                if t.contains(&a) {
                    TruthValue::True
                } else if possible.contains(&a) {
                    TruthValue::Undefined
                } else {
                    TruthValue::False
                }
            })
            .collect()
    }
}

/// Grounds `win(X) :- move(X, Y), not win(Y)` over the given moves.
pub fn win_program(moves: &[(&str, &str)]) -> (GroundProgram, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let id = |s: String, names: &mut Vec<String>| match names.iter().position(|n| *n == s) {
        Some(i) => i,
        None => {
            names.push(s);
            names.len() - 1
        }
    };
    let mut rules = Vec::new();
    for (x, y) in moves {
        let m = id(format!("move({x}, {y})"), &mut names);
        rules.push((m, vec![], vec![]));
    }
    for (x, y) in moves {
        let h = id(format!("win({x})"), &mut names);
        let m = id(format!("move({x}, {y})"), &mut names);
        let w = id(format!("win({y})"), &mut names);
        rules.push((h, vec![m], vec![w]));
    }
    (GroundProgram { atoms: names.len(), rules }, names)
}

// ---------------------------------------------------------------------------
// Ground defeasible theories.

pub fn random_defeasible_source(rng: &mut ChaCha8Rng, max_rules: usize) -> String {
    let lit = |rng: &mut ChaCha8Rng| {
        let p = rng.gen_range(0..5);
        if rng.gen_bool(0.4) {
            format!("neg p{p}")
        } else {
            format!("p{p}")
        }
    };
    let mut out = String::new();
    for _ in 0..rng.gen_range(0..=3) {
        out.push_str(&format!("{}.\n", lit(rng)));
    }
    let n = rng.gen_range(0..=max_rules);
    for i in 0..n {
        let op = match rng.gen_range(0..10) {
            0..=1 => ":-",
            2..=7 => ":=",
            _ => ":~",
        };
        let body: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| lit(rng)).collect();
        out.push_str(&format!("r{i}: {} {op} {}.\n", lit(rng), body.join(", ")));
    }
    // Acyclic by construction: lower labels beat higher ones.
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a < b {
            out.push_str(&format!("overrides(r{a}, r{b}).\n"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Event calculus narratives and a reference sweep.

#[derive(Clone, Debug)]
pub struct Narrative {
    pub initially: BTreeSet<usize>,
    /// Event kind -> (initiated fluents, terminated fluents).
    pub effects: Vec<(BTreeSet<usize>, BTreeSet<usize>)>,
    pub happens: Vec<(usize, u64)>,
}

impl Narrative {
    pub fn random(rng: &mut ChaCha8Rng, max_events: usize, fluents: usize) -> Self {
        let kinds = 6;
        let pick = |rng: &mut ChaCha8Rng| (0..fluents).filter(|_| rng.gen_bool(0.3)).collect::<BTreeSet<_>>();
        let effects = (0..kinds).map(|_| (pick(rng), pick(rng))).collect();
        let happens = (0..rng.gen_range(0..=max_events)).map(|_| (rng.gen_range(0..kinds), rng.gen_range(0..100))).collect();
        Narrative { initially: pick(rng), effects, happens }
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        for f in &self.initially {
            out.push_str(&format!("initially(f{f}).\n"));
        }
        for (k, (init, term)) in self.effects.iter().enumerate() {
            for f in init {
                out.push_str(&format!("initiates(e{k}, f{f}, T).\n"));
            }
            for f in term {
                out.push_str(&format!("terminates(e{k}, f{f}, T).\n"));
            }
        }
        for (k, t) in &self.happens {
            out.push_str(&format!("happens(e{k}, {t}).\n"));
        }
        out
    }

    /// Fold the effects of every instant before `t`; termination wins within an instant.
    pub fn holds(&self, f: usize, t: u64) -> bool {
        let mut by_time: BTreeMap<u64, (bool, bool)> = BTreeMap::new();
        for (k, s) in &self.happens {
            let (init, term) = &self.effects[*k];
            let e = by_time.entry(*s).or_default();
            e.0 |= init.contains(&f);
            e.1 |= term.contains(&f);
        }
        let mut state = self.initially.contains(&f);
        for (_, (i, x)) in by_time.range(..t) {
            if *x {
                state = false;
            } else if *i {
                state = true;
            }
        }
        state
    }
}

// ---------------------------------------------------------------------------
// Whole programs for serialization roundtrips.

const PREDS: [&str; 5] = ["p", "q", "ping_failed", "holds_for", "ünï"];
const SYMBOLS: [&str; 6] = ["a", "server1", "odd name", "Capital", "x_1", "ĝ"];
const VARS: [&str; 4] = ["X", "Y", "Zed", "_W"];
const TYPES: [&str; 3] = ["customer", "gold", "thing"];

struct TermGen<'r> {
    rng: &'r mut ChaCha8Rng,
    /// Type tag per variable name, fixed for the whole program.
    tags: BTreeMap<&'static str, Option<&'static str>>,
}

impl TermGen<'_> {
    fn constant(&mut self) -> Term {
        match self.rng.gen_range(0..4) {
            0 => Term::symbol(SYMBOLS.choose(self.rng).unwrap()),
            1 => Term::int(self.rng.gen_range(-1_000_000_000_000i64..1_000_000_000_000)),
            2 => Term::decimal((self.rng.gen_range(-1.0e6..1.0e6f64) * 1000.0).round() / 1000.0),
            _ => {
                let pool = ['a', 'Z', ' ', '"', '\\', '\n', '\t', 'é', '%', '.'];
                let s: String = (0..self.rng.gen_range(0..6)).map(|_| *pool.choose(self.rng).unwrap()).collect();
                Term::text(&s)
            }
        }
    }

    fn var(&mut self) -> Term {
        let name = *VARS.choose(self.rng).unwrap();
        let tag = *self.tags.entry(name).or_insert_with(|| None);
        Term::Var(match tag {
            Some(t) => Var::typed(name, t),
            None => Var::new(name),
        })
    }

    fn term(&mut self, depth: usize, ground: bool) -> Term {
        match self.rng.gen_range(0..10) {
            0..=2 if depth > 0 => {
                let args = (0..self.rng.gen_range(1..=3)).map(|_| self.term(depth - 1, ground)).collect();
                let f = if self.rng.gen_bool(0.2) { "list" } else { *PREDS.choose(self.rng).unwrap() };
                Term::app(f, args)
            }
            3..=5 if !ground => self.var(),
            _ => self.constant(),
        }
    }

    fn atom(&mut self, ground: bool) -> Atom {
        let args = (0..self.rng.gen_range(0..=3)).map(|_| self.term(2, ground)).collect();
        Atom::new(PREDS.choose(self.rng).unwrap(), args)
    }

    fn literal(&mut self, ground: bool, naf: bool) -> Literal {
        let a = self.atom(ground);
        let l = if self.rng.gen_bool(0.3) { Literal::neg(a) } else { Literal::pos(a) };
        if naf && self.rng.gen_bool(0.3) {
            l.naf()
        } else {
            l
        }
    }

    fn body(&mut self, min: usize) -> Vec<Literal> {
        (0..self.rng.gen_range(min..=3)).map(|_| self.literal(false, true)).collect()
    }
}

pub fn random_program(rng: &mut ChaCha8Rng, index: usize) -> Program {
    let mut tags = BTreeMap::new();
    for v in VARS {
        tags.insert(v, if rng.gen_bool(0.3) { Some(*TYPES.choose(rng).unwrap()) } else { None });
    }
    let mut g = TermGen { rng, tags };
    let mut m = RuleModule::new(&format!("m{index}"));
    if g.rng.gen_bool(0.5) {
        m.taxonomy.push((sym("gold"), sym("customer")));
    }
    for _ in 0..g.rng.gen_range(0..5) {
        m.facts.push(g.literal(true, false));
    }
    let n_rules = g.rng.gen_range(0..6);
    for i in 0..n_rules {
        let kind = *[RuleKind::Strict, RuleKind::Defeasible, RuleKind::Defeater].choose(g.rng).unwrap();
        let label = (kind != RuleKind::Strict || g.rng.gen_bool(0.5)).then(|| sym(&format!("r{i}")));
        let head = g.literal(false, false);
        let body = g.body(1);
        m.rules.push(Rule { label, kind, head, body });
    }
    let labels: Vec<_> = m.rules.iter().filter_map(|r| r.label.clone()).collect();
    if labels.len() >= 2 && g.rng.gen_bool(0.5) {
        m.priorities.push((labels[0].clone(), labels[1].clone()));
    }
    if g.rng.gen_bool(0.3) {
        let body = g.body(1);
        m.constraints.push(slalog_core::IntegrityConstraint { body });
    }
    if g.rng.gen_bool(0.4) {
        let kind = *[NormKind::Obligation, NormKind::Prohibition, NormKind::Permission].choose(g.rng).unwrap();
        let deadline = match g.rng.gen_range(0..4) {
            0 => Some(Deadline::Relative(g.rng.gen_range(1..10_000))),
            1 => Some(Deadline::Absolute(g.rng.gen_range(0..10_000))),
            2 => Some(Deadline::Standing),
            _ => None,
        };
        let trigger = g.rng.gen_bool(0.5).then(|| g.term(2, true));
        m.norms.push(Norm {
            id: sym(&format!("n{index}")),
            kind,
            bearer: g.constant(),
            trigger,
            target: g.term(2, true),
            deadline,
            reparation: g.rng.gen_bool(0.3).then(|| sym("n_other")),
        });
    }
    let mut p = Program::new(m);
    if g.rng.gen_bool(0.3) {
        p.imports.push("lib/base.ctr".into());
    }
    if g.rng.gen_bool(0.4) {
        let schedule = match g.rng.gen_range(0..3) {
            0 => Some(Schedule::Every(g.rng.gen_range(1..100_000))),
            1 => Some(Schedule::OnIngest),
            _ => None,
        };
        let event = g.body(0);
        let condition = g.body(0);
        let action = g.body(1);
        let else_action = g.rng.gen_bool(0.5).then(|| g.body(1));
        p.eca.push(EcaRule { id: sym("e1"), schedule, event, condition, action, else_action });
    }
    if g.rng.gen_bool(0.4) {
        let expect = match g.rng.gen_range(0..4) {
            0 => Expectation::True,
            1 => Expectation::False,
            2 => Expectation::Undefined,
            _ => Expectation::Answers(vec![vec![(sym("X"), g.term(1, true))], vec![]]),
        };
        let given = g.rng.gen_bool(0.5).then(|| "fixture \"one\".ctr".to_string());
        let at = g.rng.gen_bool(0.5).then(|| g.rng.gen_range(0..100_000));
        let query = g.body(1);
        p.tests.push(TestCase { id: sym("t1"), given, at, query, expect });
    }
    p
}
