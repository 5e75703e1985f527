//! Declarative test suites for rule bases.
//!
//! Every case runs on its own copy of the knowledge base, extended with the
//! case's fixture module and cut back to the narrative known at its probe
//! time. Integrity constraints are checked on the base knowledge base and on
//! each fixture snapshot.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::deontic::{materialize_state, DEONTIC_STATE_MODULE};
use crate::error::Error;
use crate::event::{ensure_ec_axioms, truncate_narrative, EC_AXIOMS_MODULE};
use crate::kb::{KnowledgeBase, RuleModule, Update};
use crate::term::{sym, Literal, Sym, Term, Var};
use crate::wfs::{solve, TruthValue};
use crate::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expectation {
    True,
    False,
    Undefined,
    /// Expected answer substitutions, compared as a set modulo renaming.
    Answers(Vec<Vec<(Sym, Term)>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TestCase {
    pub id: Sym,
    /// Fixture file, relative to the suite file.
    pub given: Option<String>,
    pub at: Option<Timestamp>,
    pub query: Vec<Literal>,
    pub expect: Expectation,
}

/// Fixture modules by `given` path; a failed load is kept as its message.
pub type Fixtures = BTreeMap<String, Result<RuleModule, String>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum CaseResult {
    Pass,
    Fail { expected: String, actual: String },
    Error { diagnostic: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub id: Sym,
    #[serde(flatten)]
    pub result: CaseResult,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IntegrityViolation {
    pub module: Sym,
    pub constraint: String,
    /// Fixture under which the violation appeared; `None` for the base knowledge base.
    pub fixture: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub cases: Vec<CaseReport>,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub integrity_violations: Vec<IntegrityViolation>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.errors == 0 && self.integrity_violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            match &c.result {
                CaseResult::Pass => writeln!(f, "PASS  {}", c.id)?,
                CaseResult::Fail { expected, actual } => {
                    writeln!(f, "FAIL  {}: expected {expected}, got {actual}", c.id)?
                }
                CaseResult::Error { diagnostic } => writeln!(f, "ERROR {}: {diagnostic}", c.id)?,
            }
        }
        for v in &self.integrity_violations {
            let under = v.fixture.as_deref().map(|x| format!(" (with {x})")).unwrap_or_default();
            writeln!(f, "INTEGRITY {}: constraint :- {}{under}", v.module, v.constraint)?;
        }
        write!(f, "{} passed, {} failed, {} errors, {} integrity violations", self.passed, self.failed, self.errors, self.integrity_violations.len())
    }
}

fn show_rows(rows: &BTreeSet<Vec<(Sym, Term)>>) -> String {
    let rows: Vec<String> = rows
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|(v, t)| format!("{v} = {t}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("answers({})", rows.join(", "))
}

/// Renames the variables inside answer terms by order of appearance, so that
/// rows equal up to renaming compare equal.
fn canonical(row: &[(Sym, Term)]) -> Vec<(Sym, Term)> {
    let mut names: BTreeMap<(Sym, u32), usize> = BTreeMap::new();
    let mut row: Vec<(Sym, Term)> = row.iter().filter(|(v, _)| !v.starts_with('_')).cloned().collect();
    row.sort_by(|a, b| a.0.cmp(&b.0));
    row.into_iter()
        .map(|(v, t)| {
            let t = t.map_vars(&mut |x| {
                let n = names.len();
                let k = *names.entry((x.name.clone(), x.scope)).or_insert(n);
                Term::Var(Var::new(&format!("_V{k}")))
            });
            (v, t)
        })
        .collect()
}

fn uses_event_calculus(kb: &KnowledgeBase, query: &[Literal]) -> bool {
    let ec = |l: &Literal| matches!(&*l.atom.pred, "holds_at" | "clipped");
    query.iter().any(ec) || kb.modules().flat_map(|m| m.rules.iter()).flat_map(|r| r.body.iter()).any(ec)
}

fn with_fixture(kb: &KnowledgeBase, given: Option<&String>, fixtures: &Fixtures) -> Result<KnowledgeBase, String> {
    let mut snap = kb.clone();
    if let Some(g) = given {
        let m = match fixtures.get(g) {
            Some(Ok(m)) => m.clone(),
            Some(Err(e)) => return Err(format!("fixture {g}: {e}")),
            None => return Err(format!("fixture {g} not loaded")),
        };
        snap.apply(vec![Update::AddModule(m)]).map_err(|e| format!("fixture {g}: {e}"))?;
    }
    Ok(snap)
}

fn case_snapshot(kb: &KnowledgeBase, case: &TestCase, fixtures: &Fixtures) -> Result<KnowledgeBase, String> {
    let mut snap = with_fixture(kb, case.given.as_ref(), fixtures)?;
    if uses_event_calculus(&snap, &case.query) && !snap.contains_module(EC_AXIOMS_MODULE) {
        ensure_ec_axioms(&mut snap).map_err(|e| e.to_string())?;
    }
    if let Some(t) = case.at {
        snap = truncate_narrative(&snap, t).map_err(|e| e.to_string())?;
        if snap.norms().next().is_some() {
            let state = materialize_state(&snap, t).map_err(|e| e.to_string())?;
            let mut updates = Vec::new();
            if snap.contains_module(DEONTIC_STATE_MODULE) {
                updates.push(Update::RemoveModule(sym(DEONTIC_STATE_MODULE)));
            }
            updates.push(Update::AddModule(state));
            snap.apply(updates).map_err(|e| e.to_string())?;
        }
    }
    Ok(snap)
}

fn run_case(kb: &KnowledgeBase, case: &TestCase, fixtures: &Fixtures) -> CaseResult {
    let snap = match case_snapshot(kb, case, fixtures) {
        Ok(s) => s,
        Err(diagnostic) => return CaseResult::Error { diagnostic },
    };
    let answers = match solve(&snap, &case.query) {
        Ok(a) => a,
        Err(e) => return CaseResult::Error { diagnostic: e.to_string() },
    };
    let (expected, actual) = match &case.expect {
        Expectation::Answers(rows) => {
            let want: BTreeSet<Vec<(Sym, Term)>> = rows.iter().map(|r| canonical(r)).collect();
            let got: BTreeSet<Vec<(Sym, Term)>> =
                answers.iter().filter(|a| a.truth == TruthValue::True).map(|a| canonical(&a.bindings)).collect();
            if want == got {
                return CaseResult::Pass;
            }
            (show_rows(&want), show_rows(&got))
        }
        e => {
            let want = match e {
                Expectation::True => TruthValue::True,
                Expectation::False => TruthValue::False,
                _ => TruthValue::Undefined,
            };
            let got = answers.iter().map(|a| a.truth).max().unwrap_or(TruthValue::False);
            if want == got {
                return CaseResult::Pass;
            }
            (want.to_string(), got.to_string())
        }
    };
    CaseResult::Fail { expected, actual }
}

/// Constraints of `kb` whose body has a True answer.
pub fn integrity_violations(kb: &KnowledgeBase) -> Result<Vec<(Sym, String)>, Error> {
    let mut out = Vec::new();
    for (module, c) in kb.constraints() {
        if solve(kb, &c.body)?.iter().any(|a| a.truth == TruthValue::True) {
            let body: Vec<String> = c.body.iter().map(|l| l.to_string()).collect();
            out.push((module.clone(), body.join(", ")));
        }
    }
    Ok(out)
}

pub fn run_suite(kb: &KnowledgeBase, cases: &[TestCase], fixtures: &Fixtures) -> SuiteReport {
    let mut report = SuiteReport::default();
    let mut seen: HashSet<&Sym> = HashSet::new();
    for case in cases {
        let result = if seen.insert(&case.id) {
            run_case(kb, case, fixtures)
        } else {
            CaseResult::Error { diagnostic: format!("duplicate test id `{}`", case.id) }
        };
        match result {
            CaseResult::Pass => report.passed += 1,
            CaseResult::Fail { .. } => report.failed += 1,
            CaseResult::Error { .. } => report.errors += 1,
        }
        report.cases.push(CaseReport { id: case.id.clone(), result });
    }

    let mut found: BTreeSet<(Sym, String)> = BTreeSet::new();
    let mut check = |snap: &KnowledgeBase, fixture: Option<&String>, report: &mut SuiteReport| match integrity_violations(snap) {
        Ok(vs) => {
            for (module, constraint) in vs {
                if found.insert((module.clone(), constraint.clone())) {
                    report.integrity_violations.push(IntegrityViolation { module, constraint, fixture: fixture.cloned() });
                }
            }
        }
        Err(e) => report.integrity_violations.push(IntegrityViolation {
            module: sym("?"),
            constraint: format!("check failed: {e}"),
            fixture: fixture.cloned(),
        }),
    };
    check(kb, None, &mut report);
    let givens: BTreeSet<&String> = cases.iter().filter_map(|c| c.given.as_ref()).collect();
    for g in givens {
        if let Ok(snap) = with_fixture(kb, Some(g), fixtures) {
            check(&snap, Some(g), &mut report);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn suite(src: &str) -> (KnowledgeBase, Vec<TestCase>) {
        let p = parse_program(src, "t").unwrap();
        let mut kb = KnowledgeBase::with_standard_library();
        kb.add_module(p.module).unwrap();
        (kb, p.tests)
    }

    fn run(src: &str, fixtures: &Fixtures) -> SuiteReport {
        let (kb, cases) = suite(src);
        run_suite(&kb, &cases, fixtures)
    }

    #[test]
    fn true_fact_passes() {
        let r = run("p. test t1 { query: p; expect: true }", &Fixtures::new());
        assert_eq!(r.cases[0].result, CaseResult::Pass);
        assert!(r.ok());
    }

    #[test]
    fn odd_loop_fails_as_undefined() {
        let r = run("p :- not p. test t1 { query: p; expect: true }", &Fixtures::new());
        assert_eq!(r.cases[0].result, CaseResult::Fail { expected: "true".into(), actual: "undefined".into() });
        assert_eq!((r.passed, r.failed, r.errors), (0, 1, 0));
    }

    #[test]
    fn fixture_exposes_integrity_violation() {
        let fx = parse_program("neg q(a).", "fx.ctr").unwrap().module;
        let fixtures: Fixtures = [("fx.ctr".to_string(), Ok(fx))].into_iter().collect();
        let r = run("q(a). constraint :- q(X), neg q(X). test t1 { given: \"fx.ctr\"; query: q(a); expect: true }", &fixtures);
        assert_eq!(r.cases[0].result, CaseResult::Pass);
        assert_eq!(r.integrity_violations.len(), 1);
        assert_eq!(r.integrity_violations[0].fixture.as_deref(), Some("fx.ctr"));
        assert!(!r.ok());
    }

    #[test]
    fn missing_fixture_is_a_case_error() {
        let r = run("p. test a { given: \"nope.ctr\"; query: p; expect: true } test b { query: p; expect: true }", &Fixtures::new());
        assert!(matches!(r.cases[0].result, CaseResult::Error { .. }));
        assert_eq!(r.cases[1].result, CaseResult::Pass);
    }

    #[test]
    fn answers_compare_as_sets_modulo_renaming() {
        let src = "p(a). p(b). r(f(Z)). test t1 { query: p(X); expect: answers([X = b], [X = a], [X = a]) }
                   test t2 { query: r(Y); expect: answers([Y = f(W)]) }
                   test t3 { query: p(X); expect: answers([X = a]) }";
        let r = run(src, &Fixtures::new());
        assert_eq!(r.cases[0].result, CaseResult::Pass);
        assert_eq!(r.cases[1].result, CaseResult::Pass);
        assert_eq!(
            r.cases[2].result,
            CaseResult::Fail { expected: "answers([X = a])".into(), actual: "answers([X = a], [X = b])".into() }
        );
    }

    #[test]
    fn probe_time_cuts_the_narrative() {
        let src = "initiates(on, light, T). terminates(off, light, T). happens(on, 2). happens(off, 7).
                   test t1 { at: 5; query: holds_at(light, 9); expect: true }
                   test t2 { query: holds_at(light, 9); expect: false }";
        let r = run(src, &Fixtures::new());
        assert!(r.ok(), "{r}");
    }

    #[test]
    fn probe_time_materializes_norm_states() {
        let src = "norm o1 { kind: obligation; bearer: p; target: pay; deadline: 100 }
                   test t1 { at: 150; query: norm_violated(o1, T); expect: answers([T = 100]) }
                   test t2 { at: 50; query: norm_active(o1); expect: true }";
        assert!(run(src, &Fixtures::new()).ok());
    }

    #[test]
    fn duplicate_ids_are_errors() {
        let (kb, mut cases) = suite("p. test a { query: p; expect: true }");
        cases.push(cases[0].clone());
        let r = run_suite(&kb, &cases, &Fixtures::new());
        assert_eq!((r.passed, r.errors), (1, 1));
    }

    #[test]
    fn empty_suite_on_consistent_kb_is_all_zero() {
        let r = run("p.", &Fixtures::new());
        assert_eq!(r, SuiteReport::default());
    }

    #[test]
    fn counts_add_up() {
        let r = run(
            "p. test a { query: p; expect: true } test b { query: p; expect: false } test c { given: \"x\"; query: p; expect: true }",
            &Fixtures::new(),
        );
        assert_eq!(r.passed + r.failed + r.errors, r.cases.len());
    }
}
