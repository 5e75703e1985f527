//! Benchmark profiles: generated programs of a given size and their canonical query.
//!
//! Rule counts include facts. For size `n`:
//! `chain` has `n + 1`, `tc` has `n + 1` (`n - 1` edges, 2 rules),
//! `win` has `n + 1` (`n` moves, 1 rule) and `defeasible` has `3n + 1`
//! (`2n` conflicting rules, `n` priorities and one fact).

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::defeasible::{Conclusions, DefeasibleTheory, ProofTag, Verdict};
use crate::kb::{KnowledgeBase, RuleModule};
use crate::term::{Atom, Literal, Rule, RuleKind, Term};
use crate::wfs::{solve_with, SolveOptions, TruthValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Chain,
    Tc,
    Win,
    Defeasible,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Chain, Profile::Tc, Profile::Win, Profile::Defeasible];

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Chain => "chain",
            Profile::Tc => "tc",
            Profile::Win => "win",
            Profile::Defeasible => "defeasible",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Rule count of the generated program, facts included.
    pub fn expected_rules(self, n: usize) -> usize {
        match self {
            Profile::Chain | Profile::Tc | Profile::Win => n + 1,
            Profile::Defeasible => 3 * n + 1,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn lit(pred: &str, args: Vec<Term>) -> Literal {
    Literal::pos(Atom::new(pred, args))
}

fn node(i: usize) -> Term {
    Term::symbol(&format!("n{i}"))
}

/// The profile program of size `n` and its canonical query.
pub fn generate(profile: Profile, n: usize) -> (RuleModule, Vec<Literal>) {
    let mut m = RuleModule::new(&format!("bench_{profile}_{n}"));
    let (x, y, z) = (Term::var("X"), Term::var("Y"), Term::var("Z"));
    let query = match profile {
        Profile::Chain => {
            m.facts.push(lit("p0", vec![]));
            for i in 1..=n {
                m.rules.push(Rule::strict(lit(&format!("p{i}"), vec![]), vec![lit(&format!("p{}", i - 1), vec![])]));
            }
            vec![lit(&format!("p{n}"), vec![])]
        }
        Profile::Tc => {
            for i in 1..n {
                m.facts.push(lit("edge", vec![Term::int(i as i64), Term::int(i as i64 + 1)]));
            }
            m.rules.push(Rule::strict(lit("reach", vec![x.clone(), y.clone()]), vec![lit("edge", vec![x.clone(), y.clone()])]));
            m.rules.push(Rule::strict(
                lit("reach", vec![x.clone(), y.clone()]),
                vec![lit("reach", vec![x.clone(), z.clone()]), lit("edge", vec![z, y.clone()])],
            ));
            vec![lit("reach", vec![x, y])]
        }
        Profile::Win => {
            for i in 0..n {
                m.facts.push(lit("move", vec![node(i), node((i + 1) % n)]));
            }
            m.rules.push(Rule::strict(
                lit("win", vec![x.clone()]),
                vec![lit("move", vec![x.clone(), y.clone()]), lit("win", vec![y]).naf()],
            ));
            vec![lit("win", vec![x])]
        }
        Profile::Defeasible => {
            m.facts.push(lit("a", vec![]));
            for i in 0..n {
                let q = Atom::new(&format!("q{i}"), vec![]);
                let (r, s) = (format!("r{i}"), format!("s{i}"));
                m.rules.push(Rule { kind: RuleKind::Defeasible, ..Rule::strict(Literal::pos(q.clone()), vec![lit("a", vec![])]).labeled(&r) });
                m.rules.push(Rule { kind: RuleKind::Defeasible, ..Rule::strict(Literal::neg(q), vec![lit("a", vec![])]).labeled(&s) });
                m.priorities.push((crate::term::sym(&r), crate::term::sym(&s)));
            }
            (0..n).map(|i| lit(&format!("q{i}"), vec![])).collect()
        }
    };
    (m, query)
}

/// Rules, facts and priorities of a generated program.
pub fn rule_count(m: &RuleModule) -> usize {
    m.rules.len() + m.facts.len() + m.priorities.len()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub profile: Profile,
    pub size: usize,
    pub rules: usize,
    /// Answers of the canonical query; for `defeasible`, literals with `+∂`.
    pub answers: usize,
    /// Best truth value among the answers (WFS profiles only).
    pub truth: Option<TruthValue>,
    pub min_ms: f64,
    pub mean_ms: f64,
    /// Largest number of tables (subgoals) over the repetitions; ground literals for `defeasible`.
    pub tables: usize,
    pub error: Option<String>,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let truth = self.truth.map(|t| t.as_str()).unwrap_or("-");
        write!(
            f,
            "{:<10} {:>7} {:>7} {:>9} {:>9} {:>10.3} {:>10.3} {:>7}",
            self.profile.as_str(),
            self.size,
            self.rules,
            self.answers,
            truth,
            self.min_ms,
            self.mean_ms,
            self.tables
        )?;
        if let Some(e) = &self.error {
            write!(f, "  error: {e}")?;
        }
        Ok(())
    }
}

pub const BENCH_HEADER: &str = "profile       size   rules   answers     truth     min_ms    mean_ms  tables";

fn once(profile: Profile, m: &RuleModule, query: &[Literal], opts: &SolveOptions) -> Result<(usize, Option<TruthValue>, usize), String> {
    match profile {
        Profile::Defeasible => {
            let t = DefeasibleTheory::from_modules([m]).map_err(|e| e.to_string())?;
            let g = t.ground().map_err(|e| e.to_string())?;
            let c = Conclusions::compute(&g);
            let yes = query.iter().filter(|q| c.verdict(&g, q, ProofTag::PlusPartial) == Verdict::Yes).count();
            Ok((yes, None, g.literal_count()))
        }
        _ => {
            let mut kb = KnowledgeBase::new();
            kb.add_module(m.clone()).map_err(|e| e.to_string())?;
            let (answers, stats) = solve_with(&kb, query, opts).map_err(|e| e.to_string())?;
            Ok((answers.len(), answers.iter().map(|a| a.truth).max(), stats.tables))
        }
    }
}

/// Generates the profile program of size `n` and times `repeat` runs of its query.
/// A failure (such as an exhausted step budget) is reported in the row.
pub fn run_bench(profile: Profile, n: usize, repeat: usize) -> BenchRow {
    let (m, query) = generate(profile, n);
    let opts = SolveOptions::from_env();
    let mut row = BenchRow {
        profile,
        size: n,
        rules: rule_count(&m),
        answers: 0,
        truth: None,
        min_ms: 0.0,
        mean_ms: 0.0,
        tables: 0,
        error: None,
    };
    let mut times = Vec::new();
    for _ in 0..repeat.max(1) {
        let clock = Instant::now();
        let r = once(profile, &m, &query, &opts);
        times.push(clock.elapsed().as_secs_f64() * 1000.0);
        match r {
            Ok((answers, truth, tables)) => {
                row.answers = answers;
                row.truth = truth;
                row.tables = row.tables.max(tables);
            }
            Err(e) => {
                row.error = Some(e);
                break;
            }
        }
    }
    row.min_ms = times.iter().copied().fold(f64::INFINITY, f64::min);
    row.mean_ms = times.iter().sum::<f64>() / times.len() as f64;
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_three() {
        let r = run_bench(Profile::Chain, 3, 1);
        assert_eq!((r.rules, r.answers, r.truth), (4, 1, Some(TruthValue::True)));
    }

    #[test]
    fn tc_on_a_four_path() {
        let r = run_bench(Profile::Tc, 4, 1);
        assert_eq!((r.rules, r.answers), (5, 6));
    }

    #[test]
    fn win_on_a_two_cycle_is_undefined() {
        let r = run_bench(Profile::Win, 2, 1);
        assert_eq!((r.answers, r.truth), (2, Some(TruthValue::Undefined)));
    }

    #[test]
    fn defeasible_pairs_resolve_by_priority() {
        let r = run_bench(Profile::Defeasible, 5, 1);
        assert_eq!((r.rules, r.answers), (16, 5));
    }

    #[test]
    fn rule_counts_match_formulas() {
        for p in Profile::ALL {
            for n in [1, 2, 7, 30] {
                let (m, _) = generate(p, n);
                assert_eq!(rule_count(&m), p.expected_rules(n), "{p} {n}");
            }
        }
    }
}
