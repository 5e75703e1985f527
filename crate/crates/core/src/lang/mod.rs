//! Front end: the textual rule language and its XML serialization.
//!
//! Text syntax in brief:
//!
//! ```text
//! :- module(sla).
//! :- import("base.ctr").
//! :- type(gold < customer).
//! q(a).                              % fact
//! p(X) :- q(X), not r(X).            % strict rule
//! r2: flies(X) := bird(X).           % labelled defeasible rule
//! r4: neg flies(X) :~ broken(X).     % defeater
//! overrides(r3, r2).
//! constraint :- q(X), neg q(X).
//! eca r1 { every: 1000; event: detect(absent(ping_ok, [0, 5000])); condition: true; action: assert(down(s1)) }
//! norm o1 { kind: obligation; bearer: provider; trigger: detect(outage); target: restore; deadline: +100; reparation: o2 }
//! test t1 { given: "fixture.ctr"; at: 5000; query: holds_at(light, 5); expect: true }
//! ```

mod lexer;
pub mod loader;
mod parser;
mod print;
mod xml;

use std::path::Path;

pub use loader::{load_files, LoadedContract};
pub use print::print_program;
pub use xml::{emit_rbsla, parse_rbsla};

use crate::eca::EcaRule;
use crate::error::ParseError;
use crate::kb::RuleModule;
use crate::term::{Literal, Term};
use crate::vnv::TestCase;

/// One parsed source file: a rule module plus the directives that do not live
/// inside the knowledge base.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub module: RuleModule,
    pub imports: Vec<String>,
    pub eca: Vec<EcaRule>,
    pub tests: Vec<TestCase>,
}

impl Program {
    pub fn new(module: RuleModule) -> Self {
        Program { module, imports: Vec::new(), eca: Vec::new(), tests: Vec::new() }
    }
}

/// Words that act as prefix operators in literal position.
pub fn is_reserved_word(s: &str) -> bool {
    matches!(s, "not" | "neg")
}

/// Module id used when a source declares none: the file stem of `origin`.
pub fn default_module_id(origin: &str) -> String {
    Path::new(origin)
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("main")
        .to_string()
}

pub fn parse_program(text: &str, origin: &str) -> Result<Program, ParseError> {
    parser::Parser::new(text, origin)?.program(&default_module_id(origin))
}

/// Parses a comma-separated query body; a trailing `.` is optional.
pub fn parse_query(text: &str) -> Result<Vec<Literal>, ParseError> {
    let mut p = parser::Parser::new(text, "<query>")?;
    let body = p.body().map_err(|d| ParseError { diagnostics: vec![d] })?;
    p.at_eof().map_err(|d| ParseError { diagnostics: vec![d] })?;
    let body = parser::normalize_tags(body.iter().collect())
        .map_err(|m| ParseError::single("<query>", 1, 1, m))?;
    Ok(body)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = parser::Parser::new(text, "<term>")?;
    let t = p.term().map_err(|d| ParseError { diagnostics: vec![d] })?;
    p.at_eof().map_err(|d| ParseError { diagnostics: vec![d] })?;
    Ok(t)
}

/// Parses text or XML depending on the file extension.
pub fn parse_source(text: &str, origin: &str) -> Result<Program, ParseError> {
    if origin.ends_with(".xml") || origin.ends_with(".rbsla") {
        parse_rbsla(text, origin)
    } else {
        parse_program(text, origin)
    }
}
