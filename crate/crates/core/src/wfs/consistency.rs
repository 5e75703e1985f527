use std::collections::BTreeSet;

use super::{solve_with, SolveOptions, TruthValue};
use crate::error::SolveError;
use crate::kb::KnowledgeBase;
use crate::term::{Atom, Literal, PredKey, Term};
use crate::unify::{Subst, Unifier};

/// Atoms `A` with both `A` and `neg A` True in the well-founded model, sorted.
pub fn check_consistency(kb: &KnowledgeBase) -> Result<Vec<Atom>, SolveError> {
    let opts = SolveOptions::from_env();
    let both: BTreeSet<(crate::term::Sym, usize)> = kb
        .predicates()
        .filter(|k| k.neg)
        .filter(|k| kb.clauses(&PredKey { neg: false, ..(*k).clone() }).len() > 0)
        .map(|k| (k.name.clone(), k.arity))
        .collect();
    let unifier = Unifier::new(kb.types());
    let mut out = BTreeSet::new();
    for (name, arity) in both {
        let args: Vec<Term> = (0..arity).map(|i| Term::var(&format!("X{i}"))).collect();
        let atom = Atom { pred: name, args };
        let true_args = |lit: Literal| -> Result<Vec<Vec<Term>>, SolveError> {
            let (answers, _) = solve_with(kb, &[lit], &opts)?;
            Ok(answers
                .into_iter()
                .filter(|a| a.truth == TruthValue::True)
                .map(|a| a.bindings.into_iter().map(|(_, t)| t).collect())
                .collect())
        };
        let pos = true_args(Literal::pos(atom.clone()))?;
        let neg = true_args(Literal::neg(atom.clone()))?;
        for p in &pos {
            for n in &neg {
                // Answers may be non-ground; rename the negative side apart before unifying.
                let n: Vec<Term> = n
                    .iter()
                    .map(|t| t.map_vars(&mut |v| Term::Var(crate::term::Var { scope: u32::MAX, ..v.clone() })))
                    .collect();
                let mut s = Subst::new();
                if p.iter().zip(&n).all(|(a, b)| unifier.unify_in(a, b, &mut s)) {
                    out.insert(Atom { pred: atom.pred.clone(), args: p.iter().map(|t| s.resolve(t)).collect() });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn witnesses(src: &str) -> Vec<String> {
        let mut kb = KnowledgeBase::new();
        kb.add_module(parse_program(src, "t").unwrap().module).unwrap();
        check_consistency(&kb).unwrap().iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn direct_contradiction() {
        assert_eq!(witnesses("p. neg p."), vec!["p"]);
    }

    #[test]
    fn consistent_program() {
        assert!(witnesses("p.").is_empty());
    }

    #[test]
    fn derived_contradiction() {
        assert_eq!(witnesses("p :- q. neg p :- r. q. r."), vec!["p"]);
    }

    #[test]
    fn undefined_is_not_a_witness() {
        assert!(witnesses("p :- not p. neg p.").is_empty());
    }
}
