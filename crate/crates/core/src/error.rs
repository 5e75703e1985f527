use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("empty update list")]
    EmptyUpdate,
    #[error("duplicate module id `{0}`")]
    DuplicateModule(String),
    #[error("no module with id `{0}`")]
    MissingModule(String),
    #[error("fact `{0}` not present")]
    MissingFact(String),
    #[error("predicate {0} is bound to a procedural attachment and cannot be defined by rules")]
    AttachmentCollision(String),
    #[error("attachment {0} already registered")]
    DuplicateAttachment(String),
    #[error("predicate {0} is reserved")]
    ReservedPredicate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type hierarchy cycle through `{0}`")]
    TaxonomyCycle(String),
    #[error("duplicate label `{label}` in module `{module}`")]
    DuplicateLabel { module: String, label: String },
    #[error("unsafe rule `{rule}`: variable {var} under `not` is bound by neither the head nor a positive body literal")]
    UnsafeRule { rule: String, var: String },
    #[error("typed variable {var} carries conflicting tags `{first}` and `{second}`")]
    ConflictingTags { var: String, first: String, second: String },
    #[error("integrity constraint with empty body in module `{0}`")]
    EmptyConstraint(String),
    #[error("norm error: {0}")]
    Norm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("resource bound exceeded: {0}")]
    ResourceExceeded(String),
    #[error("instantiation error: {0}")]
    Instantiation(String),
    #[error("unsafe query: {0}")]
    UnsafeQuery(String),
    #[error("attachment {name} failed: {message}")]
    Attachment { name: String, message: String },
    #[error("Herbrand base too large: {0}")]
    HerbrandTooLarge(String),
    #[error("unsupported by the ground oracle: {0}")]
    Unsupported(String),
}

/// A located parse or load problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub origin: String,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.origin, self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub fn single(origin: &str, line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { diagnostics: vec![Diagnostic { origin: origin.to_string(), line, col, message: message.into() }] }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefeasibleError {
    #[error("superiority relation names unknown label `{0}`")]
    UnknownLabel(String),
    #[error("superiority relation is cyclic through `{0}`")]
    CyclicSuperiority(String),
    #[error("default negation is not allowed in defeasible theories: `{0}`")]
    NafInTheory(String),
    #[error("grounding exceeded {0} rule instances")]
    GroundingBound(usize),
    #[error("literal `{0}` is not ground")]
    NonGround(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("malformed event expression `{0}`")]
    Malformed(String),
    #[error("relative window in `{0}` needs an explicit upper time bound")]
    UnboundedWindow(String),
    #[error("effect axiom `{0}` is not ground after narrative substitution")]
    NonGroundEffect(String),
    #[error("conditional effect axiom `{0}` is not supported by the timeline simulation")]
    ConditionalEffect(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Defeasible(#[from] DefeasibleError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("unknown norm `{0}`")]
    UnknownNorm(String),
    #[error("out-of-order event at position {position}: t={t} after t={previous}")]
    OutOfOrder { position: usize, t: u64, previous: u64 },
    #[error("tick at {now} is not after the previous tick at {previous}")]
    TickRegression { now: u64, previous: u64 },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
