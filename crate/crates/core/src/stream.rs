//! Event streams in JSON Lines: one `{"t": ms, "event": "functor", "args": [..]}` per line.
//!
//! String arguments that read as identifiers become symbols, other strings
//! become text constants. Blank lines are skipped.

use serde::Deserialize;

use crate::error::ParseError;
use crate::term::{Constant, Term};
use crate::Timestamp;

#[derive(Clone, Debug, PartialEq)]
pub struct StreamEvent {
    /// 1-based line in the source.
    pub line: usize,
    pub t: Timestamp,
    pub event: Term,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    t: u64,
    event: String,
    #[serde(default)]
    args: Vec<serde_json::Value>,
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_lowercase()) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn arg(v: &serde_json::Value) -> Result<Term, String> {
    use serde_json::Value;
    match v {
        Value::String(s) if is_identifier(s) => Ok(Term::symbol(s)),
        Value::String(s) => Ok(Term::text(s)),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => Ok(Term::int(i)),
            (None, Some(f)) => Ok(Term::decimal(f)),
            _ => Err(format!("number {n} out of range")),
        },
        Value::Bool(b) => Ok(Term::Const(Constant::symbol(if *b { "true" } else { "false" }))),
        other => Err(format!("unsupported argument {other}")),
    }
}

/// Parses a whole stream; the first bad line is reported with its location.
pub fn parse_events(text: &str, origin: &str) -> Result<Vec<StreamEvent>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let err = |m: String| ParseError::single(origin, line, 1, m);
        let r: Record = serde_json::from_str(raw).map_err(|e| err(format!("invalid event record: {e}")))?;
        if r.event.is_empty() {
            return Err(err("empty event name".into()));
        }
        let args = r.args.iter().map(arg).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let event = if args.is_empty() { Term::symbol(&r.event) } else { Term::app(&r.event, args) };
        out.push(StreamEvent { line, t: r.t, event });
    }
    Ok(out)
}

pub fn as_pairs(events: &[StreamEvent]) -> Vec<(Timestamp, Term)> {
    events.iter().map(|e| (e.t, e.event.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_records() {
        let text = "{\"t\": 10, \"event\": \"ping_failed\", \"args\": [\"server1\", 3, \"Down now\"]}\n\n{\"t\": 11, \"event\": \"tick\"}\n";
        let ev = parse_events(text, "e.jsonl").unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].event.to_string(), "ping_failed(server1, 3, \"Down now\")");
        assert_eq!((ev[1].line, ev[1].t, ev[1].event.clone()), (3, 11, Term::symbol("tick")));
    }

    #[test]
    fn bad_line_is_located() {
        let e = parse_events("{\"t\": 1, \"event\": \"a\"}\n{\"t\": -1, \"event\": \"a\"}", "e.jsonl").unwrap_err();
        assert_eq!((e.diagnostics[0].line, e.diagnostics[0].origin.as_str()), (2, "e.jsonl"));
    }

    #[test]
    fn nested_arguments_are_rejected() {
        assert!(parse_events("{\"t\": 1, \"event\": \"a\", \"args\": [[1]]}", "e").is_err());
    }
}
