//! Declarative SLA rule engine.
//!
//! A logic-programming kernel under the well-founded semantics with explicit
//! negation, a defeasible layer, an event calculus with a small event algebra,
//! deontic norms with contrary-to-duty reparations, a polling ECA loop and a
//! declarative test runner. Rule bases are written in a compact text syntax or
//! an XML serialization (see [`lang`]).
//!
//! ```
//! use slalog_core::{lang, wfs, KnowledgeBase, TruthValue};
//!
//! let program = lang::parse_program("q(a). p(X) :- q(X), not r(X).", "doc").unwrap();
//! let mut kb = KnowledgeBase::with_standard_library();
//! kb.add_module(program.module).unwrap();
//! let answers = wfs::solve(&kb, &lang::parse_query("p(X)").unwrap()).unwrap();
//! assert_eq!(answers.len(), 1);
//! assert_eq!(answers[0].truth, TruthValue::True);
//! ```

pub mod attach;
pub mod bench;
pub mod defeasible;
pub mod deontic;
pub mod eca;
pub mod error;
pub mod event;
pub mod kb;
pub mod lang;
pub mod report;
pub mod stream;
pub mod taxonomy;
pub mod term;
pub mod unify;
pub mod vnv;
pub mod wfs;

pub use attach::{AttachmentContract, AttachmentFn, Mode};
pub use error::{Error, Result};
pub use kb::{ChangeSummary, IntegrityConstraint, KnowledgeBase, RuleModule, Update};
pub use term::{sym, Atom, Constant, Literal, Rule, RuleKind, Sym, Term, Var};
pub use unify::{unify, Subst};
pub use wfs::{Answer, TruthValue};

/// Logical time in milliseconds since the start of a run.
pub type Timestamp = u64;
