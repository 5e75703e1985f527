//! Procedural attachments: externally implemented predicates callable from rule bodies.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ordered_float::OrderedFloat;

use crate::error::KbError;
use crate::term::{sym, Constant, Sym, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    In,
    Out,
}

/// Declared calling convention of an attachment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttachmentContract {
    pub modes: Vec<Mode>,
    pub deterministic: bool,
    pub side_effect: bool,
}

impl AttachmentContract {
    pub fn new(modes: Vec<Mode>) -> Self {
        AttachmentContract { modes, deterministic: true, side_effect: false }
    }

    pub fn nondeterministic(mut self) -> Self {
        self.deterministic = false;
        self
    }

    pub fn side_effecting(mut self) -> Self {
        self.side_effect = true;
        self
    }

    pub fn arity(&self) -> usize {
        self.modes.len()
    }
}

/// Receives the ground input-mode arguments in order and returns one row of
/// output-mode values per solution. An empty result means failure.
pub type AttachmentFn = Arc<dyn Fn(&[Term]) -> Result<Vec<Vec<Term>>, String> + Send + Sync>;

#[derive(Clone)]
pub struct Attachment {
    pub contract: AttachmentContract,
    pub func: AttachmentFn,
}

impl fmt::Debug for Attachment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Attachment").field("contract", &self.contract).finish_non_exhaustive()
    }
}

impl PartialEq for Attachment {
    // Closures have no identity worth comparing; contracts stand in for them.
    fn eq(&self, other: &Self) -> bool {
        self.contract == other.contract
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttachmentRegistry {
    entries: BTreeMap<(Sym, usize), Attachment>,
}

impl AttachmentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str, arity: usize) -> Option<&Attachment> {
        self.entries.get(&(sym(name), arity))
    }

    pub fn contains(&self, name: &str, arity: usize) -> bool {
        self.get(name, arity).is_some()
    }

    pub fn keys(&self) -> impl Iterator<Item = &(Sym, usize)> {
        self.entries.keys()
    }

    /// Adds an entry. Collision checks against rule-defined predicates are
    /// done by the knowledge base, which knows the rules.
    pub(crate) fn insert(&mut self, name: &str, contract: AttachmentContract, func: AttachmentFn) -> Result<(), KbError> {
        let key = (sym(name), contract.arity());
        if self.entries.contains_key(&key) {
            return Err(KbError::DuplicateAttachment(format!("{}/{}", key.0, key.1)));
        }
        self.entries.insert(key, Attachment { contract, func });
        Ok(())
    }

    /// Registers the arithmetic and comparison library unless already present.
    pub(crate) fn ensure_standard(&mut self) {
        for (name, contract, func) in standard_library() {
            let key = (sym(name), contract.arity());
            self.entries.entry(key).or_insert(Attachment { contract, func });
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Num {
    Int(i64),
    Dec(f64),
}

fn num(t: &Term) -> Result<Num, String> {
    match t {
        Term::Const(Constant::Integer(i)) => Ok(Num::Int(*i)),
        Term::Const(Constant::Decimal(d)) => Ok(Num::Dec(d.0)),
        other => Err(format!("type error: number expected, found {other}")),
    }
}

impl Num {
    fn as_f64(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Dec(d) => d,
        }
    }

    fn into_term(self) -> Term {
        match self {
            Num::Int(i) => Term::int(i),
            Num::Dec(d) => Term::Const(Constant::Decimal(OrderedFloat(d))),
        }
    }
}

fn arith(
    int_op: fn(i64, i64) -> Option<i64>,
    dec_op: fn(f64, f64) -> f64,
) -> AttachmentFn {
    Arc::new(move |args: &[Term]| {
        let (a, b) = (num(&args[0])?, num(&args[1])?);
        let out = match (a, b) {
            (Num::Int(x), Num::Int(y)) => Num::Int(int_op(x, y).ok_or("evaluation error: integer overflow or division by zero")?),
            (x, y) => Num::Dec(dec_op(x.as_f64(), y.as_f64())),
        };
        Ok(vec![vec![out.into_term()]])
    })
}

fn compare(test: fn(std::cmp::Ordering) -> bool) -> AttachmentFn {
    Arc::new(move |args: &[Term]| {
        let (a, b) = (num(&args[0])?, num(&args[1])?);
        let ord = match (a, b) {
            (Num::Int(x), Num::Int(y)) => x.cmp(&y),
            (x, y) => OrderedFloat(x.as_f64()).cmp(&OrderedFloat(y.as_f64())),
        };
        Ok(if test(ord) { vec![vec![]] } else { vec![] })
    })
}

/// `add/3 sub/3 mul/3 div/3 mod/3 min/3 max/3` (in, in, out) and the
/// comparisons `lessThan lessEq greaterThan greaterEq numEq` (in, in).
pub fn standard_library() -> Vec<(&'static str, AttachmentContract, AttachmentFn)> {
    use std::cmp::Ordering::*;
    let fun = || AttachmentContract::new(vec![Mode::In, Mode::In, Mode::Out]);
    let test = || AttachmentContract::new(vec![Mode::In, Mode::In]);
    vec![
        ("add", fun(), arith(i64::checked_add, |a, b| a + b)),
        ("sub", fun(), arith(i64::checked_sub, |a, b| a - b)),
        ("mul", fun(), arith(i64::checked_mul, |a, b| a * b)),
        ("div", fun(), arith(i64::checked_div, |a, b| a / b)),
        ("mod", fun(), arith(i64::checked_rem_euclid, |a, b| a.rem_euclid(b))),
        ("min", fun(), arith(|a, b| Some(a.min(b)), f64::min)),
        ("max", fun(), arith(|a, b| Some(a.max(b)), f64::max)),
        ("lessThan", test(), compare(|o| o == Less)),
        ("lessEq", test(), compare(|o| o != Greater)),
        ("greaterThan", test(), compare(|o| o == Greater)),
        ("greaterEq", test(), compare(|o| o != Less)),
        ("numEq", test(), compare(|o| o == Equal)),
    ]
}

/// The standard arithmetic attachment registered under `name`, for callers
/// that want to register individual entries explicitly.
pub fn standard(name: &str) -> Option<(AttachmentContract, AttachmentFn)> {
    standard_library().into_iter().find(|(n, _, _)| *n == name).map(|(_, c, f)| (c, f))
}
