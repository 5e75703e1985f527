//! Complex events over the narrative.
//!
//! Operators: `seq(A, B)`, `both(A, B)`, `either(A, B)`, `absent(A, W)` and
//! `times(A, N, W)`. A window `W` is `[Lo, Hi]` (absolute, inclusive) or a
//! duration `D`. For `absent` a duration acts as a watchdog: it fires `D` after
//! the last `A` (or the last firing, or time 0) when no `A` came in between.
//! For `times` it bounds the span of the counted occurrences. Partners are
//! chosen most-recent-first and every primitive occurrence is consumed at most
//! once per operator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::EventError;
use crate::kb::KnowledgeBase;
use crate::term::{Sym, Term};
use crate::unify::{Subst, Unifier};
use crate::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Window {
    Absolute { lo: Timestamp, hi: Timestamp },
    Relative(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EventExpr {
    Primitive(Term),
    Seq(Box<EventExpr>, Box<EventExpr>),
    Both(Box<EventExpr>, Box<EventExpr>),
    Either(Box<EventExpr>, Box<EventExpr>),
    Absent(Box<EventExpr>, Window),
    Times(Box<EventExpr>, u32, Window),
}

fn window(t: &Term, whole: &Term) -> Result<Window, EventError> {
    let bad = || EventError::Malformed(format!("{whole}: window must be [Lo, Hi] with Lo <= Hi or a duration >= 1"));
    match t.as_app() {
        Some((f, [lo, hi])) if &**f == "list" => match (lo.as_integer(), hi.as_integer()) {
            (Some(lo), Some(hi)) if 0 <= lo && lo <= hi => Ok(Window::Absolute { lo: lo as u64, hi: hi as u64 }),
            _ => Err(bad()),
        },
        _ => match t.as_integer() {
            Some(d) if d >= 1 => Ok(Window::Relative(d as u64)),
            _ => Err(bad()),
        },
    }
}

impl EventExpr {
    pub fn from_term(t: &Term) -> Result<Self, EventError> {
        let sub = |a: &Term| Self::from_term(a).map(Box::new);
        Ok(match t.as_app() {
            None => return Err(EventError::Malformed(t.to_string())),
            Some((f, args)) => match (&**f, args) {
                ("seq", [a, b]) => EventExpr::Seq(sub(a)?, sub(b)?),
                ("both", [a, b]) => EventExpr::Both(sub(a)?, sub(b)?),
                ("either", [a, b]) => EventExpr::Either(sub(a)?, sub(b)?),
                ("absent", [a, w]) => EventExpr::Absent(sub(a)?, window(w, t)?),
                ("times", [a, n, w]) => match n.as_integer() {
                    Some(n) if n >= 1 && n <= u32::MAX as i64 => EventExpr::Times(sub(a)?, n as u32, window(w, t)?),
                    _ => return Err(EventError::Malformed(format!("{t}: count must be >= 1"))),
                },
                _ => EventExpr::Primitive(t.clone()),
            },
        })
    }

    pub fn to_term(&self) -> Term {
        let w = |w: &Window| match *w {
            Window::Absolute { lo, hi } => Term::app("list", vec![Term::int(lo as i64), Term::int(hi as i64)]),
            Window::Relative(d) => Term::int(d as i64),
        };
        match self {
            EventExpr::Primitive(t) => t.clone(),
            EventExpr::Seq(a, b) => Term::app("seq", vec![a.to_term(), b.to_term()]),
            EventExpr::Both(a, b) => Term::app("both", vec![a.to_term(), b.to_term()]),
            EventExpr::Either(a, b) => Term::app("either", vec![a.to_term(), b.to_term()]),
            EventExpr::Absent(a, win) => Term::app("absent", vec![a.to_term(), w(win)]),
            EventExpr::Times(a, n, win) => Term::app("times", vec![a.to_term(), Term::int(*n as i64), w(win)]),
        }
    }

    fn has_relative_absent(&self) -> bool {
        match self {
            EventExpr::Primitive(_) => false,
            EventExpr::Absent(_, Window::Relative(_)) => true,
            EventExpr::Absent(a, _) | EventExpr::Times(a, _, _) => a.has_relative_absent(),
            EventExpr::Seq(a, b) | EventExpr::Both(a, b) | EventExpr::Either(a, b) => {
                a.has_relative_absent() || b.has_relative_absent()
            }
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_term().fmt(f)
    }
}

/// One match of an expression: the occurrences it is built from lie in `[start, end]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Detection {
    pub end: Timestamp,
    pub start: Timestamp,
    pub bindings: BTreeMap<Sym, Term>,
    /// Narrative positions of the contributing primitive occurrences.
    pub parts: BTreeSet<usize>,
}

impl Detection {
    pub fn time(&self) -> Timestamp {
        self.end
    }

    fn compatible(&self, other: &Detection) -> bool {
        self.parts.is_disjoint(&other.parts)
            && self.bindings.iter().all(|(k, v)| other.bindings.get(k).is_none_or(|w| w == v))
    }

    fn join(&self, other: &Detection) -> Detection {
        let mut bindings = self.bindings.clone();
        bindings.extend(other.bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
        Detection {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            bindings,
            parts: self.parts.union(&other.parts).copied().collect(),
        }
    }
}

struct Ctx<'a> {
    unifier: Unifier<'a>,
    narrative: Vec<(Term, Timestamp)>,
    upto: Option<Timestamp>,
}

/// Detections of `expr` over the narrative of `kb` ending no later than
/// `upto`, ordered by end time. Without `upto` the narrative is taken as
/// complete; watchdog windows then have no end and are an error.
pub fn detect(kb: &KnowledgeBase, expr: &EventExpr, upto: Option<Timestamp>) -> Result<Vec<Detection>, EventError> {
    if upto.is_none() && expr.has_relative_absent() {
        return Err(EventError::UnboundedWindow(expr.to_string()));
    }
    let narrative = super::narrative(kb).into_iter().filter(|(_, t)| upto.is_none_or(|u| *t <= u)).collect();
    let ctx = Ctx { unifier: Unifier::new(kb.types()), narrative, upto };
    let mut out = ctx.eval(expr);
    out.retain(|d| upto.is_none_or(|u| d.end <= u));
    Ok(out)
}

/// Index of the most recent candidate (by end, then start, then position).
fn most_recent<'d>(cands: impl Iterator<Item = (usize, &'d Detection)>) -> Option<usize> {
    cands.max_by(|(i, a), (j, b)| (a.end, a.start, *i).cmp(&(b.end, b.start, *j))).map(|(i, _)| i)
}

impl Ctx<'_> {
    fn eval(&self, e: &EventExpr) -> Vec<Detection> {
        let mut out = match e {
            EventExpr::Primitive(p) => self.primitive(p),
            EventExpr::Either(a, b) => {
                let mut v = self.eval(a);
                v.extend(self.eval(b));
                v
            }
            EventExpr::Seq(a, b) => self.seq(self.eval(a), self.eval(b)),
            EventExpr::Both(a, b) => self.both(self.eval(a), self.eval(b)),
            EventExpr::Absent(a, w) => self.absent(self.eval(a), *w),
            EventExpr::Times(a, n, w) => self.times(self.eval(a), *n as usize, *w),
        };
        out.sort();
        out.dedup();
        out
    }

    fn primitive(&self, p: &Term) -> Vec<Detection> {
        let mut vars = Vec::new();
        p.collect_vars(&mut vars);
        let mut out = Vec::new();
        for (i, (e, t)) in self.narrative.iter().enumerate() {
            let mut s = Subst::new();
            if self.unifier.unify_in(p, e, &mut s) {
                let bindings = vars
                    .iter()
                    .filter(|v| !v.name.starts_with('_'))
                    .map(|v| (v.name.clone(), s.resolve(&Term::Var(v.clone()))))
                    .collect();
                out.push(Detection { start: *t, end: *t, bindings, parts: BTreeSet::from([i]) });
            }
        }
        out
    }

    fn seq(&self, a: Vec<Detection>, b: Vec<Detection>) -> Vec<Detection> {
        let mut consumed: BTreeSet<usize> = BTreeSet::new();
        let mut out = Vec::new();
        for y in &b {
            if !y.parts.is_disjoint(&consumed) {
                continue;
            }
            let pick = most_recent(
                a.iter()
                    .enumerate()
                    .filter(|(_, x)| x.end <= y.start && x.parts.is_disjoint(&consumed) && x.compatible(y)),
            );
            if let Some(i) = pick {
                consumed.extend(a[i].parts.iter().chain(&y.parts));
                out.push(a[i].join(y));
            }
        }
        out
    }

    fn both(&self, a: Vec<Detection>, b: Vec<Detection>) -> Vec<Detection> {
        let mut arrivals: Vec<(bool, Detection)> =
            a.into_iter().map(|d| (false, d)).chain(b.into_iter().map(|d| (true, d))).collect();
        arrivals.sort_by(|(sx, x), (sy, y)| (x.end, *sx, x).cmp(&(y.end, *sy, y)));
        let mut pending: [Vec<Detection>; 2] = [Vec::new(), Vec::new()];
        let mut consumed: BTreeSet<usize> = BTreeSet::new();
        let mut out = Vec::new();
        for (side, x) in arrivals {
            if !x.parts.is_disjoint(&consumed) {
                continue;
            }
            let other = &mut pending[usize::from(!side)];
            let pick = most_recent(
                other.iter().enumerate().filter(|(_, y)| y.parts.is_disjoint(&consumed) && y.compatible(&x)),
            );
            match pick {
                Some(i) => {
                    let y = other.remove(i);
                    consumed.extend(x.parts.iter().chain(&y.parts));
                    out.push(y.join(&x));
                }
                None => pending[usize::from(side)].push(x),
            }
        }
        out
    }

    fn absent(&self, a: Vec<Detection>, w: Window) -> Vec<Detection> {
        let silent = |d: &Detection| Detection { start: d.start, end: d.end, bindings: BTreeMap::new(), parts: BTreeSet::new() };
        match w {
            Window::Absolute { lo, hi } => {
                if a.iter().any(|d| lo <= d.start && d.end <= hi) {
                    Vec::new()
                } else {
                    vec![silent(&Detection { start: lo, end: hi, ..Default::default() })]
                }
            }
            Window::Relative(span) => {
                let upto = self.upto.expect("checked by detect");
                let mut resets: Vec<Timestamp> = a.iter().map(|d| d.end).collect();
                resets.sort_unstable();
                let mut out = Vec::new();
                let mut from: Timestamp = 0;
                let mut next = resets.into_iter().peekable();
                loop {
                    let due = from.saturating_add(span);
                    // A occurrence in (from, due] restarts the watchdog.
                    while next.peek().is_some_and(|&r| r <= from) {
                        next.next();
                    }
                    match next.peek() {
                        Some(&r) if r <= due => {
                            from = r;
                            continue;
                        }
                        _ => {}
                    }
                    if due > upto {
                        break;
                    }
                    out.push(silent(&Detection { start: from, end: due, ..Default::default() }));
                    from = due;
                }
                out
            }
        }
    }

    fn times(&self, a: Vec<Detection>, n: usize, w: Window) -> Vec<Detection> {
        let mut pending: Vec<Detection> = Vec::new();
        let mut out = Vec::new();
        for x in a {
            if let Window::Absolute { lo, hi } = w {
                if x.start < lo || x.end > hi {
                    continue;
                }
            }
            if let Window::Relative(span) = w {
                pending.retain(|p| p.start.saturating_add(span) >= x.end);
            }
            let mut group: Vec<usize> = Vec::new();
            let mut acc = x.clone();
            // Newest compatible partners first.
            for i in (0..pending.len()).rev() {
                if group.len() + 1 == n {
                    break;
                }
                if pending[i].compatible(&acc) {
                    acc = pending[i].join(&acc);
                    group.push(i);
                }
            }
            if group.len() + 1 == n {
                for i in group {
                    pending.remove(i);
                }
                out.push(acc);
            } else {
                pending.push(x);
            }
        }
        out
    }
}

impl Default for Detection {
    fn default() -> Self {
        Detection { start: 0, end: 0, bindings: BTreeMap::new(), parts: BTreeSet::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, parse_term};

    fn run(narrative: &str, expr: &str, upto: Option<u64>) -> Vec<(u64, u64)> {
        let mut kb = KnowledgeBase::new();
        kb.add_module(parse_program(narrative, "t").unwrap().module).unwrap();
        let e = EventExpr::from_term(&parse_term(expr).unwrap()).unwrap();
        detect(&kb, &e, upto).unwrap().iter().map(|d| (d.start, d.end)).collect()
    }

    #[test]
    fn sequence() {
        assert_eq!(run("happens(a, 1). happens(b, 3).", "seq(a, b)", None), vec![(1, 3)]);
        assert_eq!(run("happens(b, 1). happens(a, 3).", "seq(a, b)", None), vec![]);
    }

    #[test]
    fn sequence_takes_the_most_recent_partner_once() {
        let d = run("happens(a, 1). happens(a, 2). happens(b, 3). happens(b, 4).", "seq(a, b)", None);
        assert_eq!(d, vec![(2, 3), (1, 4)]);
    }

    #[test]
    fn conjunction_in_either_order() {
        assert_eq!(run("happens(a, 3). happens(b, 1).", "both(a, b)", None), vec![(1, 3)]);
    }

    #[test]
    fn disjunction() {
        assert_eq!(run("happens(a, 3). happens(b, 1).", "either(a, b)", None), vec![(1, 1), (3, 3)]);
    }

    #[test]
    fn absence_in_closed_window() {
        assert_eq!(run("", "absent(ping_ok, [0, 5000])", None), vec![(0, 5000)]);
        assert_eq!(run("happens(ping_ok, 10).", "absent(ping_ok, [0, 5000])", None), vec![]);
        assert_eq!(run("", "absent(ping_ok, [0, 5000])", Some(4000)), vec![]);
    }

    #[test]
    fn watchdog_restarts_on_each_occurrence() {
        let d = run("happens(ok, 3).", "absent(ok, 5)", Some(14));
        assert_eq!(d, vec![(3, 8), (8, 13)]);
    }

    #[test]
    fn watchdog_needs_an_upper_bound() {
        let kb = KnowledgeBase::new();
        let e = EventExpr::from_term(&parse_term("absent(ok, 5)").unwrap()).unwrap();
        assert!(matches!(detect(&kb, &e, None), Err(EventError::UnboundedWindow(_))));
    }

    #[test]
    fn counting_with_bindings() {
        let n = "happens(fail(s1), 1). happens(fail(s2), 2). happens(fail(s1), 3). happens(fail(s1), 9).";
        assert_eq!(run(n, "times(fail(S), 2, 5)", None), vec![(1, 3)]);
        assert_eq!(run(n, "times(fail(S), 2, [0, 10])", None), vec![(1, 3)]);
        assert_eq!(run(n, "times(fail(S), 3, [0, 10])", None), vec![(1, 9)]);
    }

    #[test]
    fn detection_is_monotone_in_upto() {
        let n = "happens(a, 1). happens(b, 3). happens(a, 5). happens(b, 8).";
        let early = run(n, "seq(a, b)", Some(4));
        let late = run(n, "seq(a, b)", Some(10));
        assert_eq!(&late[..early.len()], &early[..]);
    }

    #[test]
    fn roundtrip_through_terms() {
        let t = parse_term("seq(either(a, b(X)), times(c, 3, [0, 10]))").unwrap();
        assert_eq!(EventExpr::from_term(&t).unwrap().to_term(), t);
        assert!(EventExpr::from_term(&parse_term("times(a, 0, 5)").unwrap()).is_err());
    }
}
