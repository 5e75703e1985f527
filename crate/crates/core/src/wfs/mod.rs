//! Well-founded semantics with explicit negation as distinct predicates.
//!
//! Evaluation runs in two phases. Tabled resolution (one table per call
//! variant, driven by a worklist) discovers the relevant clause instances,
//! treating `not L` optimistically so every goal it might depend on is tabled.
//! An alternating fixpoint over those instances then assigns the
//! True/False/Undefined value of every tabled atom.

mod consistency;
mod fixpoint;
mod oracle;
mod tabling;

use serde::Serialize;

pub use consistency::check_consistency;
pub use oracle::{ground_wfs_oracle, OracleOptions};

use crate::attach::Mode;
use crate::error::SolveError;
use crate::kb::KnowledgeBase;
use crate::term::{Literal, Sym, Term};
use crate::unify::{Subst, Unifier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthValue {
    False,
    Undefined,
    True,
}

impl TruthValue {
    pub fn complement(self) -> Self {
        match self {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Undefined => TruthValue::Undefined,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruthValue::True => "true",
            TruthValue::False => "false",
            TruthValue::Undefined => "undefined",
        }
    }
}

impl std::fmt::Display for TruthValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One query answer: values for the query variables (in order of first
/// occurrence) and whether the instance is True or Undefined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Answer {
    pub bindings: Vec<(Sym, Term)>,
    pub truth: TruthValue,
}

impl Answer {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.iter().find(|(v, _)| &**v == var).map(|(_, t)| t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Clause resolutions plus answer resumptions allowed per call.
    pub step_budget: u64,
    /// Maximum nesting depth of any call or answer term.
    pub depth_bound: usize,
    pub occurs_check: bool,
}

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const DEFAULT_DEPTH_BOUND: usize = 512;

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { step_budget: DEFAULT_STEP_BUDGET, depth_bound: DEFAULT_DEPTH_BOUND, occurs_check: true }
    }
}

impl SolveOptions {
    /// Defaults, with `SLALOG_STEP_BUDGET` overriding the step budget when set.
    pub fn from_env() -> Self {
        let mut o = Self::default();
        if let Some(b) = std::env::var("SLALOG_STEP_BUDGET").ok().and_then(|v| v.trim().parse().ok()) {
            o.step_budget = b;
        }
        o
    }
}

/// Work counters of one solve call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub steps: u64,
    pub tables: usize,
    pub answers: usize,
    pub instances: usize,
}

pub(crate) fn is_builtin_or_attachment(kb: &KnowledgeBase, g: &Literal) -> bool {
    let a = &g.atom;
    !g.neg && (matches!((&*a.pred, a.arity()), ("true", 0) | ("fail", 0) | ("=", 2)) || kb.registry().contains(&a.pred, a.arity()))
}

/// A goal can be selected once `not` goals are ground and attachments have ground inputs.
pub(crate) fn is_ready(kb: &KnowledgeBase, g: &Literal) -> bool {
    if g.naf {
        return g.is_ground();
    }
    if g.neg {
        return true;
    }
    match kb.registry().get(&g.atom.pred, g.atom.arity()) {
        Some(att) => att.contract.modes.iter().zip(&g.atom.args).all(|(m, a)| *m == Mode::Out || a.is_ground()),
        None => true,
    }
}

/// Substitutions under which a builtin or attachment goal succeeds. A
/// `not` goal succeeds with the empty substitution iff the positive call fails.
pub(crate) fn call_builtin(kb: &KnowledgeBase, unifier: &Unifier, goal: &Literal) -> Result<Vec<Subst>, SolveError> {
    let a = &goal.atom;
    let rows: Vec<Subst> = match (&*a.pred, a.arity()) {
        ("true", 0) => vec![Subst::new()],
        ("fail", 0) => vec![],
        ("=", 2) => {
            let mut s = Subst::new();
            if unifier.unify_in(&a.args[0], &a.args[1], &mut s) {
                vec![s]
            } else {
                vec![]
            }
        }
        _ => {
            let att = kb.registry().get(&a.pred, a.arity()).expect("checked attachment");
            let modes = &att.contract.modes;
            let inputs: Vec<Term> =
                modes.iter().zip(&a.args).filter(|(m, _)| **m == Mode::In).map(|(_, t)| t.clone()).collect();
            let out = (att.func)(&inputs)
                .map_err(|message| SolveError::Attachment { name: format!("{}/{}", a.pred, a.arity()), message })?;
            let mut rows = Vec::new();
            for row in out {
                let mut s = Subst::new();
                let mut vals = row.iter();
                let ok = modes.iter().zip(&a.args).all(|(m, t)| match m {
                    Mode::In => true,
                    Mode::Out => match vals.next() {
                        Some(v) => unifier.unify_in(t, v, &mut s),
                        None => false,
                    },
                });
                if ok {
                    rows.push(s);
                }
            }
            rows
        }
    };
    if goal.naf {
        Ok(if rows.is_empty() { vec![Subst::new()] } else { vec![] })
    } else {
        Ok(rows)
    }
}

fn check_safety(query: &[Literal]) -> Result<(), SolveError> {
    let mut bound = std::collections::HashSet::new();
    for l in query.iter().filter(|l| !l.naf) {
        bound.extend(l.atom.vars().into_iter().map(|v| v.key()));
    }
    for l in query.iter().filter(|l| l.naf) {
        if let Some(v) = l.atom.vars().into_iter().find(|v| !bound.contains(&v.key())) {
            return Err(SolveError::UnsafeQuery(format!(
                "variable {v} in `{l}` does not occur in a positive query literal"
            )));
        }
    }
    Ok(())
}

/// All answers of `query` that are True or Undefined in the well-founded model,
/// sorted and without duplicates.
pub fn solve(kb: &KnowledgeBase, query: &[Literal]) -> Result<Vec<Answer>, SolveError> {
    solve_with(kb, query, &SolveOptions::from_env()).map(|(a, _)| a)
}

pub fn solve_with(
    kb: &KnowledgeBase,
    query: &[Literal],
    opts: &SolveOptions,
) -> Result<(Vec<Answer>, SolveStats), SolveError> {
    check_safety(query)?;
    let mut engine = tabling::Engine::new(kb, opts);
    let root = engine.run_query(query)?;
    let model = fixpoint::well_founded(&engine.instances, engine.atom_count());
    let mut answers: Vec<Answer> = engine
        .answers_of(root)
        .iter()
        .filter_map(|&id| {
            let truth = model[id];
            (truth != TruthValue::False).then(|| Answer {
                bindings: engine.query_vars.iter().cloned().zip(engine.atom(id).atom.args.iter().cloned()).collect(),
                truth,
            })
        })
        .collect();
    answers.sort();
    answers.dedup();
    // The same bindings can surface with two truth values only if derived twice; keep the stronger.
    answers.dedup_by(|b, a| {
        if a.bindings == b.bindings {
            a.truth = a.truth.max(b.truth);
            true
        } else {
            false
        }
    });
    let stats = engine.stats();
    Ok((answers, stats))
}

/// Truth value of a ground literal; `not L` yields the complement of `L`.
pub fn truth_of(kb: &KnowledgeBase, lit: &Literal) -> Result<TruthValue, SolveError> {
    truth_of_with(kb, lit, &SolveOptions::from_env())
}

pub fn truth_of_with(kb: &KnowledgeBase, lit: &Literal, opts: &SolveOptions) -> Result<TruthValue, SolveError> {
    if !lit.is_ground() {
        return Err(SolveError::Instantiation(format!("truth_of needs a ground literal, got `{lit}`")));
    }
    let positive = Literal { naf: false, ..lit.clone() };
    let (answers, _) = solve_with(kb, std::slice::from_ref(&positive), opts)?;
    let t = answers.first().map(|a| a.truth).unwrap_or(TruthValue::False);
    Ok(if lit.naf { t.complement() } else { t })
}

/// Truth value of a conjunction of ground literals.
pub fn truth_of_query(kb: &KnowledgeBase, query: &[Literal]) -> Result<TruthValue, SolveError> {
    let (answers, _) = solve_with(kb, query, &SolveOptions::from_env())?;
    Ok(answers.iter().map(|a| a.truth).max().unwrap_or(TruthValue::False))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, parse_query};

    fn kb(src: &str) -> KnowledgeBase {
        let mut kb = KnowledgeBase::with_standard_library();
        kb.add_module(parse_program(src, "t").unwrap().module).unwrap();
        kb
    }

    fn q(kb: &KnowledgeBase, query: &str) -> Vec<(String, TruthValue)> {
        solve(kb, &parse_query(query).unwrap())
            .unwrap()
            .into_iter()
            .map(|a| {
                let b: Vec<String> = a.bindings.iter().map(|(v, t)| format!("{v}={t}")).collect();
                (b.join(","), a.truth)
            })
            .collect()
    }

    fn t(kb: &KnowledgeBase, lit: &str) -> TruthValue {
        truth_of(kb, &parse_query(lit).unwrap()[0]).unwrap()
    }

    #[test]
    fn naf_over_facts() {
        let k = kb("q(a). p(X) :- q(X), not r(X).");
        assert_eq!(q(&k, "p(X)"), vec![("X=a".into(), TruthValue::True)]);
    }

    #[test]
    fn odd_loop_is_undefined() {
        let k = kb("p :- not p.");
        assert_eq!(q(&k, "p"), vec![(String::new(), TruthValue::Undefined)]);
    }

    #[test]
    fn win_move_three_nodes() {
        let k = kb("move(a,b). move(b,a). move(b,c). win(X) :- move(X,Y), not win(Y).");
        assert_eq!(q(&k, "win(X)"), vec![("X=b".into(), TruthValue::True)]);
        assert_eq!(t(&k, "win(a)"), TruthValue::False);
        assert_eq!(t(&k, "win(c)"), TruthValue::False);
    }

    #[test]
    fn positive_loop_is_false() {
        assert_eq!(t(&kb("p :- p."), "p"), TruthValue::False);
    }

    #[test]
    fn explicit_negation_is_separate() {
        assert_eq!(t(&kb("q(a)."), "neg q(a)"), TruthValue::False);
    }

    #[test]
    fn even_loop_is_undefined_and_naf_complements() {
        let k = kb("p :- not q. q :- not p.");
        assert_eq!(t(&k, "p"), TruthValue::Undefined);
        assert_eq!(t(&k, "not p"), TruthValue::Undefined);
        let k = kb("p.");
        assert_eq!(t(&k, "not p"), TruthValue::False);
        assert_eq!(t(&k, "not r"), TruthValue::True);
    }

    #[test]
    fn attachments_run_when_inputs_are_ground() {
        let k = kb("");
        assert_eq!(q(&k, "add(2, 3, X)"), vec![("X=5".into(), TruthValue::True)]);
        assert!(q(&k, "lessThan(5, 3)").is_empty());
        let e = solve(&k, &parse_query("add(X, 3, 5)").unwrap()).unwrap_err();
        assert!(matches!(e, SolveError::Instantiation(_)));
        // selection skips goals that are not ready yet
        let k = kb("n(1). n(2).");
        assert_eq!(q(&k, "lessThan(X, 2), n(X)"), vec![("X=1".into(), TruthValue::True)]);
    }

    #[test]
    fn unsafe_query_is_rejected() {
        let e = solve(&kb("q(a)."), &parse_query("not q(X)").unwrap()).unwrap_err();
        assert!(matches!(e, SolveError::UnsafeQuery(_)));
    }

    #[test]
    fn left_right_and_mutual_recursion_terminate() {
        let src = "e(1,2). e(2,3). e(3,1).
                   l(X,Y) :- l(X,Z), e(Z,Y). l(X,Y) :- e(X,Y).
                   r(X,Y) :- e(X,Y). r(X,Y) :- e(X,Z), r(Z,Y).
                   a(X) :- b(X). b(X) :- a(X). a(1).";
        let k = kb(src);
        assert_eq!(q(&k, "l(X,Y)").len(), 9);
        assert_eq!(q(&k, "r(1,Y)").len(), 3);
        assert_eq!(q(&k, "b(X)"), vec![("X=1".into(), TruthValue::True)]);
    }

    #[test]
    fn function_symbols_hit_the_depth_bound() {
        let k = kb("nat(z). nat(s(X)) :- nat(X).");
        let e = solve(&k, &parse_query("nat(X)").unwrap()).unwrap_err();
        assert!(matches!(e, SolveError::ResourceExceeded(_)), "{e}");
        assert_eq!(t(&k, "nat(s(s(z)))"), TruthValue::True);
    }

    #[test]
    fn step_budget_is_enforced() {
        let k = kb("e(1,2). e(2,3). r(X,Y) :- e(X,Y). r(X,Y) :- e(X,Z), r(Z,Y).");
        let opts = SolveOptions { step_budget: 3, ..SolveOptions::default() };
        let e = solve_with(&k, &parse_query("r(X,Y)").unwrap(), &opts).unwrap_err();
        assert!(matches!(e, SolveError::ResourceExceeded(_)));
    }

    #[test]
    fn typed_rules_filter_by_taxonomy() {
        let k = kb(":- type(gold < customer).
                    type(c1, gold). type(c2, customer).
                    account(c1). account(c2).
                    premium(X:gold) :- account(X).");
        assert_eq!(q(&k, "premium(X)"), vec![("X=c1".into(), TruthValue::True)]);
    }

    #[test]
    fn non_ground_facts_answer_every_instance() {
        let k = kb("likes(X, pizza). person(ann).  happy(P) :- person(P), likes(P, pizza).");
        assert_eq!(q(&k, "happy(X)"), vec![("X=ann".into(), TruthValue::True)]);
    }

    #[test]
    fn repeated_solves_agree() {
        let k = kb("move(a,b). move(b,a). move(b,c). move(c,d). win(X) :- move(X,Y), not win(Y).");
        let qy = parse_query("win(X)").unwrap();
        assert_eq!(solve(&k, &qy).unwrap(), solve(&k, &qy).unwrap());
    }
}
