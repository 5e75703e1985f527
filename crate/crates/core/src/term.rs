//! Terms, literals and rules of the contract rule language.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use ordered_float::OrderedFloat;

/// Interned-by-refcount symbol.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// Root of every type hierarchy.
pub const ROOT_TYPE: &str = "thing";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Symbol(Sym),
    Integer(i64),
    Decimal(OrderedFloat<f64>),
    Text(Sym),
}

impl Constant {
    pub fn symbol(s: &str) -> Self {
        Constant::Symbol(sym(s))
    }

    pub fn as_symbol(&self) -> Option<&Sym> {
        match self {
            Constant::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Constant::Integer(i) => Some(*i),
            _ => None,
        }
    }
}

/// A logic variable.
///
/// Identity is the pair `(name, scope)`. Parsed variables live in scope 0; the
/// solver renames clauses apart by assigning fresh scopes. The optional type
/// tag restricts what the variable may be bound to during unification.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Sym,
    pub ty: Option<Sym>,
    pub scope: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: sym(name), ty: None, scope: 0 }
    }

    pub fn typed(name: &str, ty: &str) -> Self {
        Var { name: sym(name), ty: Some(sym(ty)), scope: 0 }
    }

    pub fn key(&self) -> VarKey {
        VarKey { name: self.name.clone(), scope: self.scope }
    }

    /// Type tag, defaulting to the root type.
    pub fn type_tag(&self) -> &str {
        self.ty.as_deref().unwrap_or(ROOT_TYPE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub name: Sym,
    pub scope: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Compound {
    pub functor: Sym,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Constant),
    Compound(Compound),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn symbol(s: &str) -> Self {
        Term::Const(Constant::symbol(s))
    }

    pub fn int(i: i64) -> Self {
        Term::Const(Constant::Integer(i))
    }

    pub fn decimal(f: f64) -> Self {
        Term::Const(Constant::Decimal(OrderedFloat(f)))
    }

    pub fn text(s: &str) -> Self {
        Term::Const(Constant::Text(sym(s)))
    }

    /// Builds `functor(args..)`, collapsing to a symbol when there are no arguments.
    pub fn app(functor: &str, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::symbol(functor)
        } else {
            Term::Compound(Compound { functor: sym(functor), args })
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Compound(c) => c.args.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Compound(c) => 1 + c.args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|w| w.key() == v.key()) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::Compound(c) => c.args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Term::Const(c) => c.as_integer(),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Sym> {
        match self {
            Term::Const(c) => c.as_symbol(),
            _ => None,
        }
    }

    /// Functor and arguments, treating a symbol as a 0-ary application.
    pub fn as_app(&self) -> Option<(&Sym, &[Term])> {
        match self {
            Term::Const(Constant::Symbol(s)) => Some((s, &[])),
            Term::Compound(c) => Some((&c.functor, &c.args)),
            _ => None,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Const(_) => self.clone(),
            Term::Compound(c) => Term::Compound(Compound {
                functor: c.functor.clone(),
                args: c.args.iter().map(|a| a.map_vars(f)).collect(),
            }),
        }
    }

    /// Collects the constants occurring in the term.
    pub fn constants(&self, out: &mut BTreeSet<Constant>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Compound(c) => c.args.iter().for_each(|a| a.constants(out)),
        }
    }
}

/// Predicate application `pred(args..)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: sym(pred), args }
    }

    pub fn prop(pred: &str) -> Self {
        Atom::new(pred, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.map_vars(f)).collect() }
    }

    /// The atom read as a term (`p` or `p(args)`).
    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Const(Constant::Symbol(self.pred.clone()))
        } else {
            Term::Compound(Compound { functor: self.pred.clone(), args: self.args.clone() })
        }
    }

    pub fn from_term(t: &Term) -> Option<Atom> {
        t.as_app().map(|(f, args)| Atom { pred: f.clone(), args: args.to_vec() })
    }
}

/// Predicate identity; explicitly negated atoms form a predicate of their own.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Sym,
    pub arity: usize,
    pub neg: bool,
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "neg ")?;
        }
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    /// Explicit (strong) negation.
    pub neg: bool,
    /// Default negation (negation as failure).
    pub naf: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, neg: false, naf: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, neg: true, naf: false }
    }

    pub fn naf(mut self) -> Self {
        self.naf = true;
        self
    }

    pub fn pred_key(&self) -> PredKey {
        PredKey { name: self.atom.pred.clone(), arity: self.atom.arity(), neg: self.neg }
    }

    /// The same literal with explicit negation flipped and default negation dropped.
    pub fn complement(&self) -> Literal {
        Literal { atom: self.atom.clone(), neg: !self.neg, naf: false }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn is_true_builtin(&self) -> bool {
        !self.neg && !self.naf && self.atom.args.is_empty() && &*self.atom.pred == "true"
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Literal {
        Literal { atom: self.atom.map_vars(f), neg: self.neg, naf: self.naf }
    }

    /// Reads `neg(a)` / `a` as a literal without default negation.
    pub fn from_term(t: &Term) -> Option<Literal> {
        match t.as_app() {
            Some((f, [inner])) if &**f == "neg" => Atom::from_term(inner).map(Literal::neg),
            _ => Atom::from_term(t).map(Literal::pos),
        }
    }

    /// Encodes the literal (ignoring `naf`) as a term: `p(a)` or `neg(p(a))`.
    pub fn to_term(&self) -> Term {
        let t = self.atom.to_term();
        if self.neg {
            Term::Compound(Compound { functor: sym("neg"), args: vec![t] })
        } else {
            t
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Strict,
    Defeasible,
    Defeater,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Strict => "strict",
            RuleKind::Defeasible => "defeasible",
            RuleKind::Defeater => "defeater",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strict" => Some(RuleKind::Strict),
            "defeasible" => Some(RuleKind::Defeasible),
            "defeater" => Some(RuleKind::Defeater),
            _ => None,
        }
    }

    pub fn operator(self) -> &'static str {
        match self {
            RuleKind::Strict => ":-",
            RuleKind::Defeasible => ":=",
            RuleKind::Defeater => ":~",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub label: Option<Sym>,
    pub kind: RuleKind,
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn strict(head: Literal, body: Vec<Literal>) -> Self {
        Rule { label: None, kind: RuleKind::Strict, head, body }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(sym(label));
        self
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for lit in std::iter::once(&self.head).chain(&self.body) {
            lit.atom.args.iter().for_each(|a| a.collect_vars(&mut out));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Textual rendering. The output is valid input for the text parser.

fn is_plain_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a symbol standing on its own; reserved words are quoted.
pub(crate) fn write_symbol(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if crate::lang::is_reserved_word(s) {
        write_quoted(f, s)
    } else {
        write_functor(f, s)
    }
}

/// Writes a symbol directly followed by `(`, where reserved words are unambiguous.
fn write_functor(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_symbol(s) {
        f.write_str(s)
    } else {
        write_quoted(f, s)
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("'")?;
    for c in s.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("'")
}

pub(crate) fn write_text(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Symbol(s) => write_symbol(f, s),
            Constant::Integer(i) => write!(f, "{i}"),
            Constant::Decimal(d) => write!(f, "{:?}", d.0),
            Constant::Text(s) => write_text(f, s),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.name.starts_with('#') {
            write!(f, "_G{}", &self.name[1..])?;
        } else {
            f.write_str(&self.name)?;
        }
        if self.scope != 0 {
            write!(f, "_{}", self.scope)?;
        }
        if let Some(ty) = &self.ty {
            f.write_str(":")?;
            write_symbol(f, ty)?;
        }
        Ok(())
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

fn write_app(f: &mut fmt::Formatter<'_>, functor: &str, args: &[Term]) -> fmt::Result {
    match (functor, args) {
        ("list", _) => {
            f.write_str("[")?;
            write_args(f, args)?;
            f.write_str("]")
        }
        ("=", [l, r]) => write!(f, "{l} = {r}"),
        (_, []) => write_symbol(f, functor),
        _ => {
            write_functor(f, functor)?;
            f.write_str("(")?;
            write_args(f, args)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Compound(c) => {
                // Nested `=` needs parentheses to reparse unambiguously.
                if &*c.functor == "=" && c.args.len() == 2 {
                    write!(f, "'='(")?;
                    write_args(f, &c.args)?;
                    f.write_str(")")
                } else {
                    write_app(f, &c.functor, &c.args)
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_app(f, &self.pred, &self.args)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.naf {
            f.write_str("not ")?;
        }
        if self.neg {
            f.write_str("neg ")?;
        }
        write!(f, "{}", self.atom)
    }
}

pub(crate) fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal]) -> fmt::Result {
    for (i, l) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            write_symbol(f, label)?;
            f.write_str(": ")?;
        }
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() || self.kind != RuleKind::Strict {
            write!(f, " {} ", self.kind.operator())?;
            if self.body.is_empty() {
                f.write_str("true")?;
            } else {
                write_body(f, &self.body)?;
            }
        }
        f.write_str(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_quotes_non_identifier_symbols() {
        let t = Term::app("f", vec![Term::symbol("Upper"), Term::symbol("ok"), Term::text("a\"b")]);
        assert_eq!(t.to_string(), "f('Upper', ok, \"a\\\"b\")");
    }

    #[test]
    fn reserved_words_are_quoted() {
        assert_eq!(Term::symbol("not").to_string(), "'not'");
    }

    #[test]
    fn literal_complement_drops_naf() {
        let l = Literal::pos(Atom::prop("p")).naf();
        let c = l.complement();
        assert!(c.neg && !c.naf);
    }

    #[test]
    fn decimal_display_keeps_fraction_marker() {
        assert_eq!(Term::decimal(1.0).to_string(), "1.0");
        assert_eq!(Term::decimal(2.5).to_string(), "2.5");
    }
}
