//! Reference model: full Herbrand grounding plus a naive alternating fixpoint.
//!
//! Deliberately shares nothing with the tabled solver beyond the data model,
//! so the two can check each other.

use std::collections::{BTreeMap, BTreeSet};

use super::TruthValue;
use crate::error::SolveError;
use crate::kb::KnowledgeBase;
use crate::term::{Constant, Literal, RuleKind, Term, Var};

#[derive(Clone, Debug)]
pub struct OracleOptions {
    /// Upper bound on ground clause instances.
    pub max_instances: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { max_instances: 200_000 }
    }
}

struct GroundClause {
    head: Literal,
    pos: Vec<Literal>,
    neg: Vec<Literal>,
}

fn no_compounds(l: &Literal) -> Result<(), SolveError> {
    if l.atom.args.iter().any(|a| matches!(a, Term::Compound(_))) {
        return Err(SolveError::Unsupported(format!("function symbols in `{l}`")));
    }
    Ok(())
}

fn substitute(l: &Literal, env: &BTreeMap<Var, Constant>) -> Literal {
    l.map_vars(&mut |v| Term::Const(env[v].clone()))
}

/// Computes the well-founded model of the strict rules and facts of `kb`.
/// Atoms of the Herbrand base that are absent from the result are False.
pub fn ground_wfs_oracle(kb: &KnowledgeBase, opts: &OracleOptions) -> Result<BTreeMap<Literal, TruthValue>, SolveError> {
    let mut clauses: Vec<(Literal, Vec<Literal>)> = Vec::new();
    for m in kb.modules() {
        clauses.extend(m.facts.iter().map(|f| (f.clone(), Vec::new())));
        clauses.extend(m.rules.iter().filter(|r| r.kind == RuleKind::Strict).map(|r| (r.head.clone(), r.body.clone())));
    }
    let mut universe = BTreeSet::new();
    for (h, body) in &clauses {
        for l in std::iter::once(h).chain(body) {
            no_compounds(l)?;
            let a = &l.atom;
            if kb.registry().contains(&a.pred, a.arity()) {
                return Err(SolveError::Unsupported(format!("attachment `{}/{}`", a.pred, a.arity())));
            }
            a.args.iter().for_each(|t| t.constants(&mut universe));
        }
    }
    let universe: Vec<Constant> = universe.into_iter().collect();

    let mut ground = Vec::new();
    for (head, body) in &clauses {
        let mut vars = Vec::new();
        for l in std::iter::once(head).chain(body) {
            l.atom.args.iter().for_each(|a| a.collect_vars(&mut vars));
        }
        let domains: Vec<Vec<Constant>> = vars
            .iter()
            .map(|v| universe.iter().filter(|c| kb.types().constant_has_type(c, v.type_tag())).cloned().collect())
            .collect();
        let count = domains.iter().try_fold(1usize, |acc, d| acc.checked_mul(d.len()));
        match count {
            Some(n) if n + ground.len() <= opts.max_instances => {}
            _ => {
                return Err(SolveError::HerbrandTooLarge(format!(
                    "grounding `{head}` exceeds {} instances",
                    opts.max_instances
                )))
            }
        }
        let mut idx = vec![0usize; vars.len()];
        'assign: loop {
            if domains.iter().any(Vec::is_empty) && !vars.is_empty() {
                break;
            }
            let env: BTreeMap<Var, Constant> =
                vars.iter().cloned().zip(idx.iter().zip(&domains).map(|(&i, d)| d[i].clone())).collect();
            if let Some(gc) = ground_clause(head, body, &env) {
                ground.push(gc);
            }
            // odometer increment
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    continue 'assign;
                }
                idx[k] = 0;
            }
            break;
        }
    }

    let mut base = BTreeSet::new();
    for gc in &ground {
        base.insert(gc.head.clone());
        base.extend(gc.pos.iter().cloned());
        base.extend(gc.neg.iter().cloned());
    }
    let gamma = |interp: &BTreeSet<Literal>| -> BTreeSet<Literal> {
        let mut model = BTreeSet::new();
        loop {
            let mut changed = false;
            for gc in &ground {
                if !model.contains(&gc.head)
                    && gc.pos.iter().all(|p| model.contains(p))
                    && gc.neg.iter().all(|n| !interp.contains(n))
                {
                    model.insert(gc.head.clone());
                    changed = true;
                }
            }
            if !changed {
                return model;
            }
        }
    };
    let mut truths = BTreeSet::new();
    let possible = loop {
        let possible = gamma(&truths);
        let next = gamma(&possible);
        if next == truths {
            break possible;
        }
        truths = next;
    };
    Ok(base
        .into_iter()
        .map(|a| {
            let t = if truths.contains(&a) {
                TruthValue::True
            } else if possible.contains(&a) {
                TruthValue::Undefined
            } else {
                TruthValue::False
            };
            (a, t)
        })
        .collect())
}

fn ground_clause(head: &Literal, body: &[Literal], env: &BTreeMap<Var, Constant>) -> Option<GroundClause> {
    let mut gc = GroundClause { head: substitute(head, env), pos: Vec::new(), neg: Vec::new() };
    for l in body {
        let g = substitute(l, env);
        let a = &g.atom;
        let builtin = match (&*a.pred, a.arity(), g.neg) {
            ("true", 0, false) => Some(true),
            ("fail", 0, false) => Some(false),
            ("=", 2, false) => Some(a.args[0] == a.args[1]),
            _ => None,
        };
        match builtin {
            Some(holds) if holds == g.naf => return None,
            Some(_) => {}
            None if g.naf => gc.neg.push(Literal { naf: false, ..g }),
            None => gc.pos.push(g),
        }
    }
    Some(gc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn model(src: &str) -> BTreeMap<String, TruthValue> {
        let mut kb = KnowledgeBase::new();
        kb.add_module(parse_program(src, "t").unwrap().module).unwrap();
        ground_wfs_oracle(&kb, &OracleOptions::default())
            .unwrap()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    #[test]
    fn single_fact() {
        assert_eq!(model("p.")["p"], TruthValue::True);
    }

    #[test]
    fn naf_of_missing_atom() {
        let m = model("p :- not q.");
        assert_eq!((m["p"], m["q"]), (TruthValue::True, TruthValue::False));
    }

    #[test]
    fn even_and_odd_loops() {
        let m = model("a :- not b. b :- not a. c :- not c.");
        assert!(m.values().all(|t| *t == TruthValue::Undefined));
    }

    #[test]
    fn grounding_bound_is_reported() {
        let mut kb = KnowledgeBase::new();
        let src: String = (0..50).map(|i| format!("d({i}). ")).collect::<String>() + "p(X,Y,Z) :- d(X), d(Y), d(Z).";
        kb.add_module(parse_program(&src, "t").unwrap().module).unwrap();
        let r = ground_wfs_oracle(&kb, &OracleOptions { max_instances: 1000 });
        assert!(matches!(r, Err(SolveError::HerbrandTooLarge(_))));
    }
}
