use std::fmt::{self, Write};

use super::Program;
use crate::deontic::Deadline;
use crate::eca::Schedule;
use crate::term::{write_body, write_symbol, Literal};
use crate::vnv::Expectation;

struct Body<'a>(&'a [Literal]);

impl fmt::Display for Body<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_body(f, self.0)
    }
}

struct Symbol<'a>(&'a str);

impl fmt::Display for Symbol<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbol(f, self.0)
    }
}

fn quote(s: &str) -> String {
    crate::term::Term::text(s).to_string()
}

/// Renders a program in the text syntax; parsing the result gives back an equal program.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let m = &p.module;
    let _ = writeln!(out, ":- module({}).", Symbol(&m.id));
    for i in &p.imports {
        let _ = writeln!(out, ":- import({}).", quote(i));
    }
    for (sub, sup) in &m.taxonomy {
        let _ = writeln!(out, ":- type({} < {}).", Symbol(sub), Symbol(sup));
    }
    for f in &m.facts {
        let _ = writeln!(out, "{f}.");
    }
    for r in &m.rules {
        let _ = writeln!(out, "{r}");
    }
    for (w, l) in &m.priorities {
        let _ = writeln!(out, "overrides({}, {}).", Symbol(w), Symbol(l));
    }
    for c in &m.constraints {
        let _ = writeln!(out, "constraint :- {}.", Body(&c.body));
    }
    for n in &m.norms {
        let _ = write!(out, "norm {} {{ kind: {}; bearer: {}", Symbol(&n.id), n.kind.as_str(), n.bearer);
        if let Some(t) = &n.trigger {
            let _ = write!(out, "; trigger: {t}");
        }
        let _ = write!(out, "; target: {}", n.target);
        match n.deadline {
            Some(Deadline::Relative(d)) => {
                let _ = write!(out, "; deadline: +{d}");
            }
            Some(Deadline::Absolute(d)) => {
                let _ = write!(out, "; deadline: {d}");
            }
            Some(Deadline::Standing) => out.push_str("; deadline: standing"),
            None => {}
        }
        if let Some(r) = &n.reparation {
            let _ = write!(out, "; reparation: {}", Symbol(r));
        }
        out.push_str(" }\n");
    }
    for e in &p.eca {
        let mut fields = Vec::new();
        match e.schedule {
            Some(Schedule::Every(ms)) => fields.push(format!("every: {ms}")),
            Some(Schedule::OnIngest) => fields.push("every: on_ingest".into()),
            None => {}
        }
        if !e.event.is_empty() {
            fields.push(format!("event: {}", Body(&e.event)));
        }
        if !e.condition.is_empty() {
            fields.push(format!("condition: {}", Body(&e.condition)));
        }
        fields.push(format!("action: {}", Body(&e.action)));
        if let Some(b) = &e.else_action {
            fields.push(format!("else: {}", Body(b)));
        }
        let _ = writeln!(out, "eca {} {{ {} }}", Symbol(&e.id), fields.join("; "));
    }
    for t in &p.tests {
        let mut fields = Vec::new();
        if let Some(g) = &t.given {
            fields.push(format!("given: {}", quote(g)));
        }
        if let Some(at) = t.at {
            fields.push(format!("at: {at}"));
        }
        fields.push(format!("query: {}", Body(&t.query)));
        fields.push(format!("expect: {}", expectation(&t.expect)));
        let _ = writeln!(out, "test {} {{ {} }}", Symbol(&t.id), fields.join("; "));
    }
    out
}

pub(crate) fn expectation(e: &Expectation) -> String {
    match e {
        Expectation::True => "true".into(),
        Expectation::False => "false".into(),
        Expectation::Undefined => "undefined".into(),
        Expectation::Answers(rows) if rows.is_empty() => "answers".into(),
        Expectation::Answers(rows) => {
            let rows: Vec<String> = rows
                .iter()
                .map(|row| {
                    let eqs: Vec<String> = row.iter().map(|(v, t)| format!("{v} = {t}")).collect();
                    format!("[{}]", eqs.join(", "))
                })
                .collect();
            format!("answers({})", rows.join(", "))
        }
    }
}
