//! Subclass taxonomy used by typed unification.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::KbError;
use crate::term::{sym, Constant, Sym, ROOT_TYPE};

/// Types every hierarchy knows about, all direct children of the root.
pub const BUILTIN_TYPES: [&str; 3] = ["integer", "decimal", "string"];

/// Acyclic subtype relation with an implicit root `thing`.
///
/// Ancestor sets are precomputed when the hierarchy is built, so subtype tests
/// are a set lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeHierarchy {
    edges: BTreeSet<(Sym, Sym)>,
    ancestors: BTreeMap<Sym, BTreeSet<Sym>>,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        TypeHierarchy::new(std::iter::empty()).expect("empty hierarchy is acyclic")
    }
}

impl TypeHierarchy {
    /// Builds the hierarchy from `(subtype, supertype)` edges.
    pub fn new(edges: impl IntoIterator<Item = (Sym, Sym)>) -> Result<Self, KbError> {
        let root = sym(ROOT_TYPE);
        let mut edges: BTreeSet<(Sym, Sym)> = edges.into_iter().collect();
        for b in BUILTIN_TYPES {
            edges.insert((sym(b), root.clone()));
        }
        let mut parents: BTreeMap<Sym, Vec<Sym>> = BTreeMap::new();
        parents.insert(root.clone(), Vec::new());
        for (sub, sup) in &edges {
            if sub == sup {
                return Err(KbError::TaxonomyCycle(sub.to_string()));
            }
            parents.entry(sub.clone()).or_default().push(sup.clone());
            parents.entry(sup.clone()).or_default();
        }
        // A declared type without a path to the root is attached to it.
        let mut ancestors = BTreeMap::new();
        for ty in parents.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = vec![ty.clone()];
            while let Some(t) = stack.pop() {
                for p in &parents[&t] {
                    if p == ty {
                        return Err(KbError::TaxonomyCycle(ty.to_string()));
                    }
                    if seen.insert(p.clone()) {
                        stack.push(p.clone());
                    }
                }
            }
            seen.insert(ty.clone());
            seen.insert(root.clone());
            ancestors.insert(ty.clone(), seen);
        }
        Ok(TypeHierarchy { edges, ancestors })
    }

    pub fn edges(&self) -> impl Iterator<Item = &(Sym, Sym)> {
        self.edges.iter()
    }

    pub fn is_declared(&self, ty: &str) -> bool {
        self.ancestors.contains_key(ty)
    }

    pub fn types(&self) -> impl Iterator<Item = &Sym> {
        self.ancestors.keys()
    }

    /// Reflexive-transitive subtype test.
    pub fn subtype_of(&self, sub: &str, sup: &str) -> Result<bool, KbError> {
        let anc = self.ancestors.get(sub).ok_or_else(|| KbError::UnknownType(sub.to_string()))?;
        if !self.is_declared(sup) {
            return Err(KbError::UnknownType(sup.to_string()));
        }
        Ok(anc.contains(sup))
    }

    /// Subtype test that treats undeclared types as unrelated to everything but themselves.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        sup == ROOT_TYPE || sub == sup || self.ancestors.get(sub).is_some_and(|a| a.contains(sup))
    }
}

/// Typing context handed to unification: hierarchy plus asserted constant types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeContext {
    pub hierarchy: TypeHierarchy,
    pub assertions: BTreeMap<Sym, BTreeSet<Sym>>,
}

impl TypeContext {
    pub fn new(hierarchy: TypeHierarchy, assertions: BTreeMap<Sym, BTreeSet<Sym>>) -> Self {
        TypeContext { hierarchy, assertions }
    }

    /// Does constant `c` belong to type `ty`?
    pub fn constant_has_type(&self, c: &Constant, ty: &str) -> bool {
        if ty == ROOT_TYPE {
            return true;
        }
        match c {
            Constant::Integer(_) => self.hierarchy.is_subtype("integer", ty),
            Constant::Decimal(_) => self.hierarchy.is_subtype("decimal", ty),
            Constant::Text(_) => self.hierarchy.is_subtype("string", ty),
            Constant::Symbol(s) => self
                .assertions
                .get(s)
                .is_some_and(|tys| tys.iter().any(|t| self.hierarchy.is_subtype(t, ty))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closure_oracle(edges: &[(&str, &str)], a: &str, b: &str) -> bool {
        // Warshall over the explicit edge list.
        let mut nodes: Vec<&str> = vec![ROOT_TYPE];
        for (x, y) in edges {
            for n in [x, y] {
                if !nodes.contains(n) {
                    nodes.push(n);
                }
            }
        }
        let idx = |s: &str| nodes.iter().position(|n| *n == s).unwrap();
        let n = nodes.len();
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            r[i][i] = true;
            r[i][0] = true;
        }
        for (x, y) in edges {
            r[idx(x)][idx(y)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r[idx(a)][idx(b)]
    }

    #[test]
    fn subtype_matches_closure_oracle() {
        let edges = [("gold", "customer"), ("silver", "customer"), ("platinum", "gold")];
        let h = TypeHierarchy::new(edges.iter().map(|(a, b)| (sym(a), sym(b)))).unwrap();
        let names = ["thing", "customer", "gold", "silver", "platinum"];
        for a in names {
            for b in names {
                assert_eq!(h.subtype_of(a, b).unwrap(), closure_oracle(&edges, a, b), "{a} <= {b}");
            }
        }
        assert!(h.subtype_of("gold", "customer").unwrap());
        assert!(!h.subtype_of("customer", "gold").unwrap());
        assert!(h.subtype_of("gold", "gold").unwrap());
    }

    #[test]
    fn unknown_type_is_an_error() {
        let h = TypeHierarchy::default();
        assert!(matches!(h.subtype_of("nope", "thing"), Err(KbError::UnknownType(_))));
        assert!(h.subtype_of("thing", "thing").unwrap());
    }

    #[test]
    fn cycles_are_rejected() {
        let r = TypeHierarchy::new([(sym("a"), sym("b")), (sym("b"), sym("a"))]);
        assert!(matches!(r, Err(KbError::TaxonomyCycle(_))));
    }

    #[test]
    fn numbers_have_builtin_types() {
        let ctx = TypeContext::default();
        assert!(ctx.constant_has_type(&Constant::Integer(3), "integer"));
        assert!(!ctx.constant_has_type(&Constant::Integer(3), "string"));
        assert!(ctx.constant_has_type(&Constant::symbol("x"), "thing"));
    }
}
