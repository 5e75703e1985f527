//! RBSLA-style XML serialization.
//!
//! Element vocabulary: `rbsla`, `module`, `rule(kind,label)`, `head`, `body`,
//! `atom`, `rel`, `var(type)`, `ind(type)`, `data`, `neg`, `naf`,
//! `overrides(winner,loser)`, `constraint`, `taxonomy`, `subclassOf(sub,super)`,
//! `eca(id,every)`, `event`, `condition`, `action`, `else`, `norm(kind,id)`,
//! `test(id,expect)`. Tests additionally accept `given` and `at` attributes.

use std::collections::HashSet;
use std::fmt::Write;

use roxmltree::{Document, Node};

use super::{print, Program};
use crate::deontic::{Deadline, Norm, NormKind};
use crate::eca::{EcaRule, Schedule};
use crate::error::{Diagnostic, ParseError};
use crate::kb::{IntegrityConstraint, RuleModule};
use crate::term::{sym, Atom, Compound, Constant, Literal, Rule, RuleKind, Sym, Term, Var};
use crate::vnv::{Expectation, TestCase};

// ---------------------------------------------------------------------------
// emission

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            // Keep whitespace exact inside attributes and text.
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn emit_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => match &v.ty {
            Some(ty) => {
                let _ = write!(out, "<var type=\"{}\">{}</var>", esc(ty), esc(&v.name));
            }
            None => {
                let _ = write!(out, "<var>{}</var>", esc(&v.name));
            }
        },
        Term::Const(Constant::Symbol(s)) => {
            let _ = write!(out, "<ind>{}</ind>", esc(s));
        }
        Term::Const(Constant::Integer(i)) => {
            let _ = write!(out, "<ind type=\"integer\">{i}</ind>");
        }
        Term::Const(Constant::Decimal(d)) => {
            let _ = write!(out, "<ind type=\"decimal\">{:?}</ind>", d.0);
        }
        Term::Const(Constant::Text(s)) => {
            let _ = write!(out, "<data>{}</data>", esc(s));
        }
        Term::Compound(c) => emit_app(out, &c.functor, &c.args),
    }
}

fn emit_app(out: &mut String, rel: &str, args: &[Term]) {
    let _ = write!(out, "<atom><rel>{}</rel>", esc(rel));
    for a in args {
        emit_term(out, a);
    }
    out.push_str("</atom>");
}

fn emit_literal(out: &mut String, l: &Literal) {
    if l.naf {
        out.push_str("<naf>");
    }
    if l.neg {
        out.push_str("<neg>");
    }
    emit_app(out, &l.atom.pred, &l.atom.args);
    if l.neg {
        out.push_str("</neg>");
    }
    if l.naf {
        out.push_str("</naf>");
    }
}

fn emit_section(out: &mut String, indent: &str, tag: &str, lits: &[Literal]) {
    let _ = write!(out, "{indent}<{tag}>");
    for l in lits {
        emit_literal(out, l);
    }
    let _ = writeln!(out, "</{tag}>");
}

fn field(out: &mut String, name: &str, args: &[Term]) {
    out.push_str("    ");
    emit_app(out, name, args);
    out.push('\n');
}

/// Serializes a program; [`parse_rbsla`] reads it back to an equal program.
pub fn emit_rbsla(p: &Program) -> String {
    let m = &p.module;
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let empty = p.imports.is_empty() && m.is_empty() && p.eca.is_empty() && p.tests.is_empty();
    if empty {
        let _ = writeln!(out, "<rbsla id=\"{}\"/>", esc(&m.id));
        return out;
    }
    let _ = writeln!(out, "<rbsla id=\"{}\">", esc(&m.id));
    for i in &p.imports {
        let _ = writeln!(out, "  <module>{}</module>", esc(i));
    }
    if !m.taxonomy.is_empty() {
        out.push_str("  <taxonomy>\n");
        for (sub, sup) in &m.taxonomy {
            let _ = writeln!(out, "    <subclassOf sub=\"{}\" super=\"{}\"/>", esc(sub), esc(sup));
        }
        out.push_str("  </taxonomy>\n");
    }
    for f in &m.facts {
        out.push_str("  ");
        emit_literal(&mut out, f);
        out.push('\n');
    }
    for r in &m.rules {
        let _ = write!(out, "  <rule kind=\"{}\"", r.kind.as_str());
        if let Some(l) = &r.label {
            let _ = write!(out, " label=\"{}\"", esc(l));
        }
        out.push_str(">\n");
        emit_section(&mut out, "    ", "head", std::slice::from_ref(&r.head));
        emit_section(&mut out, "    ", "body", &r.body);
        out.push_str("  </rule>\n");
    }
    for (w, l) in &m.priorities {
        let _ = writeln!(out, "  <overrides winner=\"{}\" loser=\"{}\"/>", esc(w), esc(l));
    }
    for c in &m.constraints {
        out.push_str("  <constraint>\n");
        emit_section(&mut out, "    ", "body", &c.body);
        out.push_str("  </constraint>\n");
    }
    for n in &m.norms {
        let _ = writeln!(out, "  <norm kind=\"{}\" id=\"{}\">", n.kind.as_str(), esc(&n.id));
        field(&mut out, "bearer", std::slice::from_ref(&n.bearer));
        if let Some(t) = &n.trigger {
            field(&mut out, "trigger", std::slice::from_ref(t));
        }
        field(&mut out, "target", std::slice::from_ref(&n.target));
        match n.deadline {
            Some(Deadline::Relative(d)) => field(&mut out, "deadline", &[Term::symbol("relative"), Term::int(d as i64)]),
            Some(Deadline::Absolute(d)) => field(&mut out, "deadline", &[Term::symbol("absolute"), Term::int(d as i64)]),
            Some(Deadline::Standing) => field(&mut out, "deadline", &[Term::symbol("standing")]),
            None => {}
        }
        if let Some(r) = &n.reparation {
            field(&mut out, "reparation", &[Term::Const(Constant::Symbol(r.clone()))]);
        }
        out.push_str("  </norm>\n");
    }
    for e in &p.eca {
        let _ = write!(out, "  <eca id=\"{}\"", esc(&e.id));
        match e.schedule {
            Some(Schedule::Every(ms)) => {
                let _ = write!(out, " every=\"{ms}\"");
            }
            Some(Schedule::OnIngest) => out.push_str(" every=\"on_ingest\""),
            None => {}
        }
        out.push_str(">\n");
        emit_section(&mut out, "    ", "event", &e.event);
        emit_section(&mut out, "    ", "condition", &e.condition);
        emit_section(&mut out, "    ", "action", &e.action);
        if let Some(b) = &e.else_action {
            emit_section(&mut out, "    ", "else", b);
        }
        out.push_str("  </eca>\n");
    }
    for t in &p.tests {
        let kind = match &t.expect {
            Expectation::Answers(_) => "answers".to_string(),
            other => print::expectation(other),
        };
        let _ = write!(out, "  <test id=\"{}\" expect=\"{kind}\"", esc(&t.id));
        if let Some(g) = &t.given {
            let _ = write!(out, " given=\"{}\"", esc(g));
        }
        if let Some(at) = t.at {
            let _ = write!(out, " at=\"{at}\"");
        }
        out.push_str(">\n");
        emit_section(&mut out, "    ", "body", &t.query);
        if let Expectation::Answers(rows) = &t.expect {
            for row in rows {
                let eqs: Vec<Term> = row
                    .iter()
                    .map(|(v, val)| {
                        Term::Compound(Compound { functor: sym("="), args: vec![Term::Var(Var::new(v)), val.clone()] })
                    })
                    .collect();
                out.push_str("    ");
                emit_app(&mut out, "answer", &eqs);
                out.push('\n');
            }
        }
        out.push_str("  </test>\n");
    }
    out.push_str("</rbsla>\n");
    out
}

// ---------------------------------------------------------------------------
// parsing

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    origin: &'a str,
}

type XResult<T> = Result<T, Diagnostic>;

fn path(n: Node) -> String {
    let mut parts = Vec::new();
    for node in n.ancestors().filter(|a| a.is_element()) {
        let name = node.tag_name().name();
        let same = |s: &Node| s.tag_name().name() == name;
        let mut before = 0;
        let mut cur = node.prev_sibling_element();
        while let Some(s) = cur {
            before += usize::from(same(&s));
            cur = s.prev_sibling_element();
        }
        let mut after = 0;
        let mut cur = node.next_sibling_element();
        while let Some(s) = cur {
            after += usize::from(same(&s));
            cur = s.next_sibling_element();
        }
        parts.push(if before + after > 0 { format!("{name}[{}]", before + 1) } else { name.to_string() });
    }
    parts.reverse();
    format!("/{}", parts.join("/"))
}

fn elements<'a, 'input>(n: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    n.children().filter(|c| c.is_element())
}

impl<'a, 'input> Reader<'a, 'input> {
    fn err(&self, n: Node, msg: impl Into<String>) -> Diagnostic {
        let pos = self.doc.text_pos_at(n.range().start);
        Diagnostic {
            origin: self.origin.to_string(),
            line: pos.row as usize,
            col: pos.col as usize,
            message: format!("{}: {}", path(n), msg.into()),
        }
    }

    fn attr<'n>(&self, n: Node<'n, 'input>, name: &str) -> XResult<&'n str> {
        n.attribute(name).ok_or_else(|| self.err(n, format!("missing attribute `{name}`")))
    }

    fn check_attrs(&self, n: Node, allowed: &[&str]) -> XResult<()> {
        for a in n.attributes() {
            if !allowed.contains(&a.name()) || a.namespace().is_some() {
                return Err(self.err(n, format!("unexpected attribute `{}`", a.name())));
            }
        }
        Ok(())
    }

    fn no_text(&self, n: Node) -> XResult<()> {
        for c in n.children() {
            if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
                return Err(self.err(n, "unexpected text content"));
            }
        }
        Ok(())
    }

    fn leaf_text(&self, n: Node) -> XResult<String> {
        if let Some(c) = elements(n).next() {
            return Err(self.err(c, "unexpected element inside a leaf"));
        }
        Ok(n.children().filter_map(|c| c.text()).collect())
    }

    fn term(&self, n: Node) -> XResult<Term> {
        match n.tag_name().name() {
            "var" => {
                self.check_attrs(n, &["type"])?;
                let name = self.leaf_text(n)?;
                if name.is_empty() {
                    return Err(self.err(n, "empty variable name"));
                }
                let mut v = Var::new(&name);
                v.ty = n.attribute("type").map(sym);
                Ok(Term::Var(v))
            }
            "ind" => {
                self.check_attrs(n, &["type"])?;
                let text = self.leaf_text(n)?;
                match n.attribute("type") {
                    None => Ok(Term::symbol(&text)),
                    Some("integer") => {
                        text.trim().parse().map(Term::int).map_err(|_| self.err(n, format!("bad integer `{text}`")))
                    }
                    Some("decimal") => {
                        text.trim().parse().map(Term::decimal).map_err(|_| self.err(n, format!("bad decimal `{text}`")))
                    }
                    Some(other) => Err(self.err(n, format!("unknown individual type `{other}`"))),
                }
            }
            "data" => {
                self.check_attrs(n, &[])?;
                Ok(Term::text(&self.leaf_text(n)?))
            }
            "atom" => {
                let (rel, args) = self.app(n)?;
                Ok(Term::Compound(Compound { functor: rel, args }))
            }
            other => Err(self.err(n, format!("unknown term element `{other}`"))),
        }
    }

    fn app(&self, n: Node) -> XResult<(Sym, Vec<Term>)> {
        self.check_attrs(n, &[])?;
        self.no_text(n)?;
        let mut kids = elements(n);
        let rel = kids.next().filter(|k| k.tag_name().name() == "rel").ok_or_else(|| self.err(n, "missing `rel`"))?;
        self.check_attrs(rel, &[])?;
        let name = self.leaf_text(rel)?;
        let args = kids.map(|k| self.term(k)).collect::<XResult<Vec<_>>>()?;
        Ok((sym(&name), args))
    }

    fn literal(&self, n: Node) -> XResult<Literal> {
        match n.tag_name().name() {
            "atom" => {
                let (rel, args) = self.app(n)?;
                Ok(Literal::pos(Atom { pred: rel, args }))
            }
            "neg" => {
                let inner = self.single_child(n)?;
                if inner.tag_name().name() != "atom" {
                    return Err(self.err(inner, "`neg` applies to atoms only"));
                }
                let (rel, args) = self.app(inner)?;
                Ok(Literal::neg(Atom { pred: rel, args }))
            }
            "naf" => {
                let inner = self.single_child(n)?;
                if inner.tag_name().name() == "naf" {
                    return Err(self.err(inner, "`naf` may not be nested"));
                }
                Ok(self.literal(inner)?.naf())
            }
            other => Err(self.err(n, format!("unknown element `{other}`"))),
        }
    }

    fn single_child(&self, n: Node<'a, 'input>) -> XResult<Node<'a, 'input>> {
        self.check_attrs(n, &[])?;
        self.no_text(n)?;
        let mut kids = elements(n);
        match (kids.next(), kids.next()) {
            (Some(k), None) => Ok(k),
            _ => Err(self.err(n, "expected exactly one child element")),
        }
    }

    fn section(&self, n: Node) -> XResult<Vec<Literal>> {
        self.check_attrs(n, &[])?;
        self.no_text(n)?;
        elements(n).map(|k| self.literal(k)).collect()
    }

    fn program(&self) -> XResult<Program> {
        let root = self.doc.root_element();
        if root.tag_name().name() != "rbsla" {
            return Err(self.err(root, format!("root element must be `rbsla`, found `{}`", root.tag_name().name())));
        }
        self.check_attrs(root, &["id"])?;
        self.no_text(root)?;
        let mut prog = Program::new(RuleModule::new(self.attr(root, "id")?));
        let mut labels = HashSet::new();
        let mut ids: HashSet<(&str, String)> = HashSet::new();
        for n in elements(root) {
            match n.tag_name().name() {
                "module" => {
                    self.check_attrs(n, &[])?;
                    prog.imports.push(self.leaf_text(n)?);
                }
                "taxonomy" => {
                    self.check_attrs(n, &[])?;
                    self.no_text(n)?;
                    for e in elements(n) {
                        if e.tag_name().name() != "subclassOf" {
                            return Err(self.err(e, format!("unknown element `{}`", e.tag_name().name())));
                        }
                        self.check_attrs(e, &["sub", "super"])?;
                        prog.module.taxonomy.push((sym(self.attr(e, "sub")?), sym(self.attr(e, "super")?)));
                    }
                }
                "atom" | "neg" => prog.module.facts.push(self.literal(n)?),
                "naf" => return Err(self.err(n, "facts may not use `naf`")),
                "rule" => {
                    let r = self.rule(n)?;
                    if let Some(l) = &r.label {
                        if !labels.insert(l.clone()) {
                            return Err(self.err(n, format!("duplicate label `{l}`")));
                        }
                    }
                    prog.module.rules.push(r);
                }
                "overrides" => {
                    self.check_attrs(n, &["winner", "loser"])?;
                    prog.module.priorities.push((sym(self.attr(n, "winner")?), sym(self.attr(n, "loser")?)));
                }
                "constraint" => {
                    self.check_attrs(n, &[])?;
                    self.no_text(n)?;
                    let body = self.named_child(n, "body")?;
                    let body = self.section(body)?;
                    if body.is_empty() {
                        return Err(self.err(n, "constraint body is empty"));
                    }
                    prog.module.constraints.push(IntegrityConstraint { body });
                }
                "norm" => {
                    let norm = self.norm(n)?;
                    if !ids.insert(("norm", norm.id.to_string())) {
                        return Err(self.err(n, format!("duplicate norm id `{}`", norm.id)));
                    }
                    prog.module.norms.push(norm);
                }
                "eca" => {
                    let e = self.eca(n)?;
                    if !ids.insert(("eca", e.id.to_string())) {
                        return Err(self.err(n, format!("duplicate eca id `{}`", e.id)));
                    }
                    prog.eca.push(e);
                }
                "test" => {
                    let t = self.test(n)?;
                    if !ids.insert(("test", t.id.to_string())) {
                        return Err(self.err(n, format!("duplicate test id `{}`", t.id)));
                    }
                    prog.tests.push(t);
                }
                other => return Err(self.err(n, format!("unknown element `{other}`"))),
            }
        }
        Ok(prog)
    }

    fn named_child(&self, n: Node<'a, 'input>, name: &str) -> XResult<Node<'a, 'input>> {
        let mut kids = elements(n);
        match (kids.next(), kids.next()) {
            (Some(k), None) if k.tag_name().name() == name => Ok(k),
            _ => Err(self.err(n, format!("expected a single `{name}` child"))),
        }
    }

    fn rule(&self, n: Node) -> XResult<Rule> {
        self.check_attrs(n, &["kind", "label"])?;
        self.no_text(n)?;
        let kind_s = self.attr(n, "kind")?;
        let kind = RuleKind::parse(kind_s)
            .ok_or_else(|| self.err(n, format!("attribute `kind` has invalid value `{kind_s}`")))?;
        let label = n.attribute("label").map(sym);
        let mut kids = elements(n);
        let head = kids.next().filter(|k| k.tag_name().name() == "head").ok_or_else(|| self.err(n, "missing `head`"))?;
        let body = kids.next();
        if let Some(extra) = kids.next() {
            return Err(self.err(extra, "unexpected element after `body`"));
        }
        let mut head_lits = self.section(head)?;
        if head_lits.len() != 1 {
            return Err(self.err(head, "head must hold exactly one literal"));
        }
        let head_lit = head_lits.remove(0);
        if head_lit.naf {
            return Err(self.err(head, "rule heads may not use `naf`"));
        }
        let body = match body {
            Some(b) if b.tag_name().name() == "body" => self.section(b)?,
            Some(b) => return Err(self.err(b, format!("unknown element `{}`", b.tag_name().name()))),
            None => Vec::new(),
        };
        Ok(Rule { label, kind, head: head_lit, body })
    }

    fn norm(&self, n: Node) -> XResult<Norm> {
        self.check_attrs(n, &["kind", "id"])?;
        self.no_text(n)?;
        let kind_s = self.attr(n, "kind")?;
        let kind = NormKind::parse(kind_s)
            .ok_or_else(|| self.err(n, format!("attribute `kind` has invalid value `{kind_s}`")))?;
        let id = sym(self.attr(n, "id")?);
        let (mut bearer, mut trigger, mut target, mut deadline, mut reparation) = (None, None, None, None, None);
        let mut seen = HashSet::new();
        for f in elements(n) {
            if f.tag_name().name() != "atom" {
                return Err(self.err(f, "norm fields are `atom` elements"));
            }
            let (name, args) = self.app(f)?;
            if !seen.insert(name.clone()) {
                return Err(self.err(f, format!("field `{name}` given twice")));
            }
            let one = |args: &[Term]| match args {
                [t] => Ok(t.clone()),
                _ => Err(self.err(f, format!("field `{name}` takes one argument"))),
            };
            match &*name {
                "bearer" => bearer = Some(one(&args)?),
                "trigger" => trigger = Some(one(&args)?),
                "target" => target = Some(one(&args)?),
                "reparation" => {
                    reparation = Some(
                        one(&args)?.as_symbol().cloned().ok_or_else(|| self.err(f, "reparation must be a norm id"))?,
                    )
                }
                "deadline" => {
                    let d = match (args.first().and_then(Term::as_symbol).map(|s| &**s), args.get(1)) {
                        (Some("standing"), None) => Some(Deadline::Standing),
                        (Some("relative"), Some(t)) => t.as_integer().filter(|i| *i >= 0).map(|i| Deadline::Relative(i as u64)),
                        (Some("absolute"), Some(t)) => t.as_integer().filter(|i| *i >= 0).map(|i| Deadline::Absolute(i as u64)),
                        _ => None,
                    };
                    deadline = Some(d.filter(|_| args.len() <= 2).ok_or_else(|| self.err(f, "malformed deadline"))?);
                }
                other => return Err(self.err(f, format!("unknown norm field `{other}`"))),
            }
        }
        let missing = |what: &str| self.err(n, format!("norm `{id}` lacks `{what}`"));
        Ok(Norm {
            kind,
            bearer: bearer.ok_or_else(|| missing("bearer"))?,
            target: target.ok_or_else(|| missing("target"))?,
            id: id.clone(),
            trigger,
            deadline,
            reparation,
        })
    }

    fn eca(&self, n: Node) -> XResult<EcaRule> {
        self.check_attrs(n, &["id", "every"])?;
        self.no_text(n)?;
        let id = sym(self.attr(n, "id")?);
        let schedule = match n.attribute("every") {
            None => None,
            Some("on_ingest") => Some(Schedule::OnIngest),
            Some(v) => Some(Schedule::Every(
                v.parse::<u64>()
                    .ok()
                    .filter(|ms| *ms >= 1)
                    .ok_or_else(|| self.err(n, format!("attribute `every` has invalid value `{v}`")))?,
            )),
        };
        let mut rule =
            EcaRule { id, schedule, event: Vec::new(), condition: Vec::new(), action: Vec::new(), else_action: None };
        let mut seen = HashSet::new();
        for k in elements(n) {
            let name = k.tag_name().name();
            if !seen.insert(name) {
                return Err(self.err(k, format!("`{name}` given twice")));
            }
            let lits = match name {
                "event" | "condition" | "action" | "else" => self.section(k)?,
                other => return Err(self.err(k, format!("unknown element `{other}`"))),
            };
            match name {
                "event" => rule.event = lits,
                "condition" => rule.condition = lits,
                "action" => rule.action = lits,
                _ => rule.else_action = Some(lits),
            }
        }
        if rule.action.is_empty() {
            return Err(self.err(n, "eca rule has no action"));
        }
        Ok(rule)
    }

    fn test(&self, n: Node) -> XResult<TestCase> {
        self.check_attrs(n, &["id", "expect", "given", "at"])?;
        self.no_text(n)?;
        let id = sym(self.attr(n, "id")?);
        let expect_s = self.attr(n, "expect")?;
        let mut kids = elements(n);
        let body = kids.next().filter(|k| k.tag_name().name() == "body").ok_or_else(|| self.err(n, "missing `body`"))?;
        let query = self.section(body)?;
        let rest: Vec<Node> = kids.collect();
        let expect = match expect_s {
            "true" | "false" | "undefined" => {
                if let Some(extra) = rest.first() {
                    return Err(self.err(*extra, "answers are only allowed with expect=\"answers\""));
                }
                match expect_s {
                    "true" => Expectation::True,
                    "false" => Expectation::False,
                    _ => Expectation::Undefined,
                }
            }
            "answers" => {
                let mut rows = Vec::new();
                for a in rest {
                    let (name, eqs) = if a.tag_name().name() == "atom" {
                        self.app(a)?
                    } else {
                        return Err(self.err(a, "expected an `answer` atom"));
                    };
                    let row = (&*name == "answer")
                        .then(|| {
                            eqs.iter()
                                .map(|eq| match eq.as_app() {
                                    Some((e, [Term::Var(v), val])) if &**e == "=" => Some((v.name.clone(), val.clone())),
                                    _ => None,
                                })
                                .collect::<Option<Vec<_>>>()
                        })
                        .flatten()
                        .ok_or_else(|| self.err(a, "malformed answer"))?;
                    rows.push(row);
                }
                Expectation::Answers(rows)
            }
            other => return Err(self.err(n, format!("attribute `expect` has invalid value `{other}`"))),
        };
        let at = match n.attribute("at") {
            None => None,
            Some(v) => Some(v.parse().map_err(|_| self.err(n, format!("attribute `at` has invalid value `{v}`")))?),
        };
        Ok(TestCase { id, given: n.attribute("given").map(str::to_string), at, query, expect })
    }
}

pub fn parse_rbsla(xml: &str, origin: &str) -> Result<Program, ParseError> {
    let doc = Document::parse(xml).map_err(|e| {
        let pos = e.pos();
        ParseError::single(origin, pos.row as usize, pos.col as usize, e.to_string())
    })?;
    Reader { doc: &doc, origin }.program().map_err(|d| ParseError { diagnostics: vec![d] })
}
