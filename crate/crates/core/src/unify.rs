//! Typed unification with occurs check.

use std::collections::HashMap;

use crate::taxonomy::TypeContext;
use crate::term::{Atom, Compound, Literal, Term, Var, VarKey};

/// Triangular substitution. Bindings may refer to other bound variables;
/// [`Subst::resolve`] follows them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: HashMap<VarKey, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(&v.key())
    }

    pub fn bind(&mut self, v: &Var, t: Term) {
        self.map.insert(v.key(), t);
    }

    /// Adds the bindings of `other`, whose variables must be unbound here.
    pub(crate) fn extend_from(&mut self, other: &Subst) {
        self.map.extend(other.map.iter().map(|(k, t)| (k.clone(), t.clone())));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, &Term)> {
        self.map.iter()
    }

    /// Follows variable chains at the top level only.
    pub fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(&v.key()) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Fully applies the substitution.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(c) => Term::Compound(Compound {
                functor: c.functor.clone(),
                args: c.args.iter().map(|a| self.resolve(a)).collect(),
            }),
            other => other.clone(),
        }
    }

    pub fn resolve_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.resolve(t)).collect() }
    }

    pub fn resolve_literal(&self, l: &Literal) -> Literal {
        Literal { atom: self.resolve_atom(&l.atom), neg: l.neg, naf: l.naf }
    }
}

/// Unification engine parameterised by a typing context.
#[derive(Clone, Copy, Debug)]
pub struct Unifier<'a> {
    pub types: &'a TypeContext,
    pub occurs_check: bool,
}

impl<'a> Unifier<'a> {
    pub fn new(types: &'a TypeContext) -> Self {
        Unifier { types, occurs_check: true }
    }

    pub fn with_occurs_check(mut self, on: bool) -> Self {
        self.occurs_check = on;
        self
    }

    /// Most general unifier of `a` and `b` extending `bindings`, or `None`.
    pub fn unify(&self, a: &Term, b: &Term, bindings: &Subst) -> Option<Subst> {
        let mut s = bindings.clone();
        self.unify_in(a, b, &mut s).then_some(s)
    }

    pub fn unify_atoms(&self, a: &Atom, b: &Atom, s: &mut Subst) -> bool {
        a.pred == b.pred
            && a.args.len() == b.args.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.unify_in(x, y, s))
    }

    /// Unifies in place. On failure `s` may hold partial bindings; callers that
    /// need the old state must clone first.
    pub fn unify_in(&self, a: &Term, b: &Term, s: &mut Subst) -> bool {
        let a = s.walk(a).clone();
        let b = s.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x.key() == y.key() => true,
            (Term::Var(x), Term::Var(y)) => {
                let (tx, ty) = (x.type_tag(), y.type_tag());
                let h = &self.types.hierarchy;
                if h.is_subtype(ty, tx) {
                    s.bind(x, b.clone());
                    true
                } else if h.is_subtype(tx, ty) {
                    s.bind(y, a.clone());
                    true
                } else {
                    false
                }
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => self.bind_var(x, t, s),
            (Term::Const(c), Term::Const(d)) => c == d,
            (Term::Compound(c), Term::Compound(d)) => {
                c.functor == d.functor
                    && c.args.len() == d.args.len()
                    && c.args.iter().zip(&d.args).all(|(x, y)| self.unify_in(x, y, s))
            }
            _ => false,
        }
    }

    fn bind_var(&self, v: &Var, t: &Term, s: &mut Subst) -> bool {
        let tag = v.type_tag();
        let ok = match t {
            Term::Const(c) => self.types.constant_has_type(c, tag),
            // Compound terms carry no asserted type and so only fit the root type.
            Term::Compound(_) => self.types.hierarchy.is_subtype(crate::term::ROOT_TYPE, tag),
            Term::Var(_) => unreachable!("variable pairs handled by caller"),
        };
        if !ok || (self.occurs_check && occurs(v, t, s)) {
            return false;
        }
        s.bind(v, t.clone());
        true
    }
}

fn occurs(v: &Var, t: &Term, s: &Subst) -> bool {
    match s.walk(t) {
        Term::Var(w) => w.key() == v.key(),
        Term::Const(_) => false,
        Term::Compound(c) => c.args.iter().any(|a| occurs(v, a, s)),
    }
}

/// Convenience wrapper over [`Unifier::unify`] with occurs check on.
pub fn unify(t1: &Term, t2: &Term, bindings: &Subst, types: &TypeContext) -> Option<Subst> {
    Unifier::new(types).unify(t1, t2, bindings)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use proptest::prelude::*;

    use super::*;
    use crate::taxonomy::TypeHierarchy;
    use crate::term::sym;

    fn gold_ctx() -> TypeContext {
        let h = TypeHierarchy::new([(sym("gold"), sym("customer"))]).unwrap();
        let mut assertions = BTreeMap::new();
        assertions.insert(sym("c1"), BTreeSet::from([sym("gold")]));
        assertions.insert(sym("c2"), BTreeSet::from([sym("customer")]));
        TypeContext::new(h, assertions)
    }

    #[test]
    fn binds_variable_to_constant() {
        let ctx = TypeContext::default();
        let s = unify(
            &Term::app("f", vec![Term::var("X")]),
            &Term::app("f", vec![Term::symbol("a")]),
            &Subst::new(),
            &ctx,
        )
        .unwrap();
        assert_eq!(s.resolve(&Term::var("X")), Term::symbol("a"));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn typed_variables_respect_subsumption() {
        let ctx = gold_ctx();
        let x_customer = Term::Var(Var::typed("X", "customer"));
        let x_gold = Term::Var(Var::typed("X", "gold"));
        assert!(unify(&x_customer, &Term::symbol("c1"), &Subst::new(), &ctx).is_some());
        assert!(unify(&x_gold, &Term::symbol("c2"), &Subst::new(), &ctx).is_none());
        // unasserted constants are of the root type only
        assert!(unify(&x_gold, &Term::symbol("c9"), &Subst::new(), &ctx).is_none());
    }

    #[test]
    fn typed_variable_pair_keeps_specific_tag() {
        let ctx = gold_ctx();
        let x = Term::Var(Var::typed("X", "customer"));
        let y = Term::Var(Var::typed("Y", "gold"));
        let s = unify(&x, &y, &Subst::new(), &ctx).unwrap();
        assert_eq!(s.resolve(&x), y);
        let s = unify(&y, &x, &Subst::new(), &ctx).unwrap();
        assert_eq!(s.resolve(&x), y);
    }

    #[test]
    fn occurs_check_rejects_cyclic_binding() {
        let ctx = TypeContext::default();
        let x = Term::var("X");
        let fx = Term::app("f", vec![x.clone()]);
        assert!(unify(&x, &fx, &Subst::new(), &ctx).is_none());
        assert!(Unifier::new(&ctx).with_occurs_check(false).unify(&x, &fx, &Subst::new()).is_some());
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["X", "Y", "Z"]).prop_map(Term::var),
            prop::sample::select(vec!["a", "b"]).prop_map(Term::symbol),
            (0i64..3).prop_map(Term::int),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner, 1..3))
                .prop_map(|(f, args)| Term::app(f, args))
        })
    }

    fn alpha_equivalent(a: &Term, b: &Term) -> bool {
        fn go(a: &Term, b: &Term, fwd: &mut HashMap<VarKey, VarKey>, back: &mut HashMap<VarKey, VarKey>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let f = fwd.entry(x.key()).or_insert_with(|| y.key()).clone();
                    let g = back.entry(y.key()).or_insert_with(|| x.key()).clone();
                    f == y.key() && g == x.key()
                }
                (Term::Const(c), Term::Const(d)) => c == d,
                (Term::Compound(c), Term::Compound(d)) => {
                    c.functor == d.functor
                        && c.args.len() == d.args.len()
                        && c.args.iter().zip(&d.args).all(|(x, y)| go(x, y, fwd, back))
                }
                _ => false,
            }
        }
        go(a, b, &mut HashMap::new(), &mut HashMap::new())
    }

    proptest! {
        #[test]
        fn unifier_equates_both_sides(a in arb_term(), b in arb_term()) {
            let ctx = TypeContext::default();
            if let Some(s) = unify(&a, &b, &Subst::new(), &ctx) {
                prop_assert_eq!(s.resolve(&a), s.resolve(&b));
            }
        }

        #[test]
        fn unification_is_symmetric(a in arb_term(), b in arb_term()) {
            let ctx = TypeContext::default();
            let ab = unify(&a, &b, &Subst::new(), &ctx);
            let ba = unify(&b, &a, &Subst::new(), &ctx);
            prop_assert_eq!(ab.is_some(), ba.is_some());
            if let (Some(s1), Some(s2)) = (ab, ba) {
                let pair = |s: &Subst| Term::app("p", vec![s.resolve(&a), s.resolve(&b)]);
                prop_assert!(alpha_equivalent(&pair(&s1), &pair(&s2)));
            }
        }

        #[test]
        fn typed_binding_never_escapes_tag(c in prop::sample::select(vec!["c1", "c2", "c3"]),
                                           tag in prop::sample::select(vec!["thing", "customer", "gold"])) {
            // Exhaustive over a three-constant universe.
            let ctx = gold_ctx();
            let v = Term::Var(Var::typed("X", tag));
            let bound = unify(&v, &Term::symbol(c), &Subst::new(), &ctx).is_some();
            let asserted: &[&str] = match c { "c1" => &["gold"], "c2" => &["customer"], _ => &[] };
            let expected = tag == "thing" || asserted.iter().any(|t| ctx.hierarchy.is_subtype(t, tag));
            prop_assert_eq!(bound, expected);
        }
    }
}
