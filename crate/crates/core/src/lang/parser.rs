//! Recursive-descent parser for the textual rule language.

use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Tok, Token};
use super::Program;
use crate::deontic::{Deadline, Norm, NormKind};
use crate::eca::{EcaRule, Schedule};
use crate::error::{Diagnostic, ParseError};
use crate::kb::{IntegrityConstraint, RuleModule};
use crate::term::{sym, Atom, Compound, Constant, Literal, Rule, RuleKind, Sym, Term, Var};
use crate::vnv::{Expectation, TestCase};

const MAX_NESTING: usize = 200;
const MAX_DIAGNOSTICS: usize = 20;

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    origin: &'a str,
    depth: usize,
    anon: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &str, origin: &'a str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src, origin)?, pos: 0, origin, depth: 0, anon: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Diagnostic {
        let t = &self.toks[self.pos];
        Diagnostic { origin: self.origin.to_string(), line: t.line, col: t.col, message: msg.into() }
    }

    fn err_at(&self, t: &Token, msg: impl Into<String>) -> Diagnostic {
        Diagnostic { origin: self.origin.to_string(), line: t.line, col: t.col, message: msg.into() }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.next())
        } else {
            Err(self.err_here(format!("expected {} but found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn symbol_token(&mut self, what: &str) -> PResult<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.next();
                Ok(sym(&s))
            }
            other => Err(self.err_here(format!("expected {what} but found {}", other.describe()))),
        }
    }

    fn nest<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.depth >= MAX_NESTING {
            return Err(self.err_here("term nesting too deep"));
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    // -- terms ------------------------------------------------------------

    pub(crate) fn term(&mut self) -> PResult<Term> {
        let lhs = self.primary()?;
        if self.eat(&Tok::Eq) {
            let rhs = self.primary()?;
            return Ok(Term::Compound(Compound { functor: sym("="), args: vec![lhs, rhs] }));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> PResult<Term> {
        self.nest(|p| {
            let t = p.next();
            match t.tok.clone() {
                Tok::Var(name) => {
                    let name = if name == "_" {
                        p.anon += 1;
                        format!("_A{}", p.anon)
                    } else {
                        name
                    };
                    let mut v = Var::new(&name);
                    if *p.peek() == Tok::Colon && matches!(p.peek_at(1), Tok::Ident(_) | Tok::Quoted(_)) {
                        p.next();
                        v.ty = Some(p.symbol_token("type name")?);
                    }
                    Ok(Term::Var(v))
                }
                Tok::Int(i) => Ok(Term::int(i)),
                Tok::Dec(d) => Ok(Term::decimal(d)),
                Tok::Minus => match p.next().tok {
                    Tok::Int(i) => Ok(Term::int(-i)),
                    Tok::Dec(d) => Ok(Term::decimal(-d)),
                    _ => Err(p.err_at(&t, "expected a number after `-`")),
                },
                Tok::Str(s) => Ok(Term::text(&s)),
                Tok::Ident(s) | Tok::Quoted(s) => {
                    if *p.peek() == Tok::LParen && p.toks[p.pos].start == t.end {
                        p.next();
                        let args = p.args(Tok::RParen)?;
                        Ok(Term::Compound(Compound { functor: sym(&s), args }))
                    } else {
                        Ok(Term::Const(Constant::Symbol(sym(&s))))
                    }
                }
                Tok::LBracket => {
                    let args = if p.eat(&Tok::RBracket) { Vec::new() } else { p.args(Tok::RBracket)? };
                    Ok(Term::Compound(Compound { functor: sym("list"), args }))
                }
                Tok::LParen => {
                    let inner = p.term()?;
                    p.expect(Tok::RParen)?;
                    Ok(inner)
                }
                other => Err(p.err_at(&t, format!("expected a term but found {}", other.describe()))),
            }
        })
    }

    fn args(&mut self, close: Tok) -> PResult<Vec<Term>> {
        let mut out = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            out.push(self.term()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    // -- literals ---------------------------------------------------------

    fn is_prefix(&self, word: &str) -> bool {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                // `neg(x)` written without a space is an ordinary atom.
                !(*self.peek_at(1) == Tok::LParen && self.toks[self.pos + 1].start == self.toks[self.pos].end)
            }
            _ => false,
        }
    }

    pub(crate) fn literal(&mut self) -> PResult<Literal> {
        if self.is_prefix("not") {
            self.next();
            let mut l = self.literal()?;
            if l.naf {
                return Err(self.err_here("`not` may not be nested"));
            }
            l.naf = true;
            return Ok(l);
        }
        if self.is_prefix("neg") {
            self.next();
            if self.is_prefix("not") {
                return Err(self.err_here("explicit negation applies to atoms only"));
            }
            let mut l = self.literal()?;
            if l.neg {
                return Err(self.err_here("`neg` may not be nested"));
            }
            l.neg = true;
            return Ok(l);
        }
        let start = self.toks[self.pos].clone();
        let t = self.term()?;
        match Atom::from_term(&t) {
            Some(atom) => Ok(Literal::pos(atom)),
            None => Err(self.err_at(&start, format!("expected an atom but found `{t}`"))),
        }
    }

    pub(crate) fn body(&mut self) -> PResult<Vec<Literal>> {
        let mut out = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            out.push(self.literal()?);
        }
        Ok(out)
    }

    // -- program ----------------------------------------------------------

    pub(crate) fn program(&mut self, default_id: &str) -> Result<Program, ParseError> {
        let mut prog = Program::new(RuleModule::new(default_id));
        let mut diags = Vec::new();
        let mut labels: HashSet<Sym> = HashSet::new();
        let mut block_ids: HashSet<(&'static str, Sym)> = HashSet::new();
        let mut module_set = false;
        while *self.peek() != Tok::Eof {
            let before = self.pos;
            self.anon = 0;
            let r = self.item(&mut prog, &mut labels, &mut block_ids, &mut module_set);
            if let Err(d) = r {
                diags.push(d);
                if diags.len() >= MAX_DIAGNOSTICS {
                    break;
                }
                self.recover(before);
            }
        }
        if diags.is_empty() {
            Ok(prog)
        } else {
            Err(ParseError { diagnostics: diags })
        }
    }

    /// Skips to just past the next clause terminator or block end.
    fn recover(&mut self, before: usize) {
        if self.pos == before {
            self.next();
        }
        let mut braces = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => braces += 1,
                Tok::RBrace if braces <= 1 => {
                    self.next();
                    return;
                }
                Tok::RBrace => braces -= 1,
                Tok::Dot if braces == 0 => {
                    self.next();
                    return;
                }
                _ => {}
            }
            self.next();
        }
    }

    fn item(
        &mut self,
        prog: &mut Program,
        labels: &mut HashSet<Sym>,
        block_ids: &mut HashSet<(&'static str, Sym)>,
        module_set: &mut bool,
    ) -> PResult<()> {
        if *self.peek() == Tok::Neck {
            return self.directive(prog, module_set);
        }
        if let Tok::Ident(kw) = self.peek().clone() {
            let kind = match kw.as_str() {
                "eca" => Some("eca"),
                "norm" => Some("norm"),
                "test" => Some("test"),
                _ => None,
            };
            if let Some(kind) = kind {
                if matches!(self.peek_at(1), Tok::Ident(_) | Tok::Quoted(_)) && *self.peek_at(2) == Tok::LBrace {
                    let kw_tok = self.next();
                    let id = self.symbol_token("block id")?;
                    if !block_ids.insert((kind, id.clone())) {
                        return Err(self.err_at(&kw_tok, format!("duplicate {kind} id `{id}`")));
                    }
                    return match kind {
                        "eca" => self.eca_block(id).map(|r| prog.eca.push(r)),
                        "norm" => self.norm_block(id).map(|n| prog.module.norms.push(n)),
                        _ => self.test_block(id).map(|t| prog.tests.push(t)),
                    };
                }
            }
        }
        self.clause(prog, labels)
    }

    fn directive(&mut self, prog: &mut Program, module_set: &mut bool) -> PResult<()> {
        self.expect(Tok::Neck)?;
        let at = self.toks[self.pos].clone();
        let name = self.symbol_token("directive name")?;
        self.expect(Tok::LParen)?;
        match &*name {
            "module" => {
                if *module_set {
                    return Err(self.err_at(&at, "module id declared twice"));
                }
                prog.module.id = self.symbol_token("module id")?;
                *module_set = true;
            }
            "import" => match self.next().tok {
                Tok::Str(path) => prog.imports.push(path),
                other => return Err(self.err_at(&at, format!("import expects a quoted path, found {}", other.describe()))),
            },
            "type" => {
                let sub = self.symbol_token("type name")?;
                self.expect(Tok::Lt)?;
                let sup = self.symbol_token("type name")?;
                prog.module.taxonomy.push((sub, sup));
            }
            other => return Err(self.err_at(&at, format!("unknown directive `{other}`"))),
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        Ok(())
    }

    fn clause(&mut self, prog: &mut Program, labels: &mut HashSet<Sym>) -> PResult<()> {
        let start = self.toks[self.pos].clone();
        let label = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(s) | Tok::Quoted(s), Tok::Colon) => {
                self.next();
                self.next();
                Some(sym(&s))
            }
            _ => None,
        };
        let head = self.literal()?;
        if head.naf {
            return Err(self.err_at(&start, "rule heads may not use `not`"));
        }
        let kind = match self.peek() {
            Tok::Neck => Some(RuleKind::Strict),
            Tok::DefNeck => Some(RuleKind::Defeasible),
            Tok::DefeaterNeck => Some(RuleKind::Defeater),
            _ => None,
        };
        let mut body = Vec::new();
        if kind.is_some() {
            self.next();
            body = self.body()?;
        }
        self.expect(Tok::Dot)?;
        let is_head = |name: &str, arity: usize| !head.neg && &*head.atom.pred == name && head.atom.arity() == arity;

        if is_head("constraint", 0) && kind == Some(RuleKind::Strict) && label.is_none() {
            let body = normalize_tags(body.iter().collect()).map_err(|m| self.err_at(&start, m))?;
            prog.module.constraints.push(IntegrityConstraint { body });
            return Ok(());
        }
        if is_head("overrides", 2) && kind.is_none() && label.is_none() {
            let pair = match (head.atom.args[0].as_symbol(), head.atom.args[1].as_symbol()) {
                (Some(w), Some(l)) => (w.clone(), l.clone()),
                _ => return Err(self.err_at(&start, "overrides/2 expects two rule labels")),
            };
            prog.module.priorities.push(pair);
            return Ok(());
        }
        let mut all: Vec<&Literal> = vec![&head];
        all.extend(&body);
        let mut lits = normalize_tags(all).map_err(|m| self.err_at(&start, m))?;
        let head = lits.remove(0);
        let mut body = lits;
        match (kind, label) {
            (None, None) => prog.module.facts.push(head),
            (kind, label) => {
                let kind = kind.unwrap_or(RuleKind::Strict);
                if kind != RuleKind::Strict && body.len() == 1 && body[0].is_true_builtin() {
                    body.clear();
                }
                if let Some(l) = &label {
                    if !labels.insert(l.clone()) {
                        return Err(self.err_at(&start, format!("duplicate label `{l}`")));
                    }
                }
                prog.module.rules.push(Rule { label, kind, head, body });
            }
        }
        Ok(())
    }

    // -- blocks -----------------------------------------------------------

    /// Reads `{ name: value; ... }`, handing each field name to `field`.
    fn fields(&mut self, mut field: impl FnMut(&mut Self, &Token, &str) -> PResult<()>) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        let mut seen = HashSet::new();
        while !self.eat(&Tok::RBrace) {
            let at = self.toks[self.pos].clone();
            let name = self.symbol_token("field name")?;
            if !seen.insert(name.clone()) {
                return Err(self.err_at(&at, format!("field `{name}` given twice")));
            }
            self.expect(Tok::Colon)?;
            field(self, &at, &name)?;
            if !self.eat(&Tok::Semi) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(())
    }

    fn eca_block(&mut self, id: Sym) -> PResult<EcaRule> {
        let open = self.toks[self.pos].clone();
        let mut rule =
            EcaRule { id, schedule: None, event: Vec::new(), condition: Vec::new(), action: Vec::new(), else_action: None };
        self.fields(|p, at, name| {
            match name {
                "every" => {
                    rule.schedule = Some(match p.next().tok {
                        Tok::Int(ms) if ms >= 1 => Schedule::Every(ms as u64),
                        Tok::Ident(s) if s == "on_ingest" => Schedule::OnIngest,
                        _ => return Err(p.err_at(at, "`every` expects a period >= 1 ms or `on_ingest`")),
                    })
                }
                "event" => rule.event = p.clause_body(at)?,
                "condition" => rule.condition = p.clause_body(at)?,
                "action" => rule.action = p.clause_body(at)?,
                "else" => rule.else_action = Some(p.clause_body(at)?),
                other => return Err(p.err_at(at, format!("unknown eca field `{other}`"))),
            }
            Ok(())
        })?;
        if rule.action.is_empty() {
            return Err(self.err_at(&open, format!("eca rule `{}` has no action", rule.id)));
        }
        Ok(rule)
    }

    fn clause_body(&mut self, at: &Token) -> PResult<Vec<Literal>> {
        let body = self.body()?;
        normalize_tags(body.iter().collect()).map_err(|m| self.err_at(at, m))
    }

    fn norm_block(&mut self, id: Sym) -> PResult<Norm> {
        let open = self.toks[self.pos].clone();
        let (mut kind, mut bearer, mut trigger, mut target, mut deadline, mut reparation) =
            (None, None, None, None, None, None);
        self.fields(|p, at, name| {
            match name {
                "kind" => {
                    let k = p.symbol_token("norm kind")?;
                    kind = Some(NormKind::parse(&k).ok_or_else(|| p.err_at(at, format!("unknown norm kind `{k}`")))?);
                }
                "bearer" => bearer = Some(p.term()?),
                "trigger" => trigger = Some(p.term()?),
                "target" => target = Some(p.term()?),
                "deadline" => {
                    deadline = Some(match p.next().tok {
                        Tok::Plus => match p.next().tok {
                            Tok::Int(n) if n >= 0 => Deadline::Relative(n as u64),
                            _ => return Err(p.err_at(at, "expected a duration after `+`")),
                        },
                        Tok::Int(n) if n >= 0 => Deadline::Absolute(n as u64),
                        Tok::Ident(s) if s == "standing" => Deadline::Standing,
                        _ => return Err(p.err_at(at, "deadline expects `+N`, `N` or `standing`")),
                    })
                }
                "reparation" => reparation = Some(p.symbol_token("norm id")?),
                other => return Err(p.err_at(at, format!("unknown norm field `{other}`"))),
            }
            Ok(())
        })?;
        let missing = |f: &str| self.err_at(&open, format!("norm `{id}` lacks `{f}`"));
        Ok(Norm {
            kind: kind.ok_or_else(|| missing("kind"))?,
            bearer: bearer.ok_or_else(|| missing("bearer"))?,
            target: target.ok_or_else(|| missing("target"))?,
            id: id.clone(),
            trigger,
            deadline,
            reparation,
        })
    }

    fn test_block(&mut self, id: Sym) -> PResult<TestCase> {
        let open = self.toks[self.pos].clone();
        let (mut given, mut at_time, mut query, mut expect) = (None, None, None, None);
        self.fields(|p, at, name| {
            match name {
                "given" => match p.next().tok {
                    Tok::Str(s) => given = Some(s),
                    _ => return Err(p.err_at(at, "`given` expects a quoted path")),
                },
                "at" => match p.next().tok {
                    Tok::Int(n) if n >= 0 => at_time = Some(n as u64),
                    _ => return Err(p.err_at(at, "`at` expects a timestamp")),
                },
                "query" => query = Some(p.clause_body(at)?),
                "expect" => {
                    let t = p.term()?;
                    expect = Some(expectation(&t).ok_or_else(|| p.err_at(at, format!("malformed expectation `{t}`")))?);
                }
                other => return Err(p.err_at(at, format!("unknown test field `{other}`"))),
            }
            Ok(())
        })?;
        Ok(TestCase {
            id: id.clone(),
            given,
            at: at_time,
            query: query.ok_or_else(|| self.err_at(&open, format!("test `{id}` lacks `query`")))?,
            expect: expect.ok_or_else(|| self.err_at(&open, format!("test `{id}` lacks `expect`")))?,
        })
    }

    pub(crate) fn at_eof(&mut self) -> PResult<()> {
        self.eat(&Tok::Dot);
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.err_here(format!("unexpected {} after query", self.peek().describe())))
        }
    }
}

/// Reads `true | false | undefined | answers([X = a, ..], ..)`.
pub(crate) fn expectation(t: &Term) -> Option<Expectation> {
    let (f, args) = t.as_app()?;
    match (&**f, args) {
        ("true", []) => Some(Expectation::True),
        ("false", []) => Some(Expectation::False),
        ("undefined", []) => Some(Expectation::Undefined),
        ("answers", rows) => rows
            .iter()
            .map(|row| match row.as_app() {
                Some((l, eqs)) if &**l == "list" => eqs
                    .iter()
                    .map(|eq| match eq.as_app() {
                        Some((e, [Term::Var(v), value])) if &**e == "=" => Some((v.name.clone(), value.clone())),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>(),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Expectation::Answers),
        _ => None,
    }
}

/// Spreads a variable's type tag over all its occurrences in one clause.
pub(crate) fn normalize_tags(lits: Vec<&Literal>) -> Result<Vec<Literal>, String> {
    let mut tags: HashMap<Sym, Sym> = HashMap::new();
    for l in &lits {
        for v in l.atom.vars() {
            if let Some(t) = v.ty {
                match tags.get(&v.name) {
                    Some(prev) if *prev != t => {
                        return Err(format!("variable {} carries conflicting types `{prev}` and `{t}`", v.name))
                    }
                    _ => {
                        tags.insert(v.name.clone(), t);
                    }
                }
            }
        }
    }
    Ok(lits
        .into_iter()
        .map(|l| {
            l.map_vars(&mut |v| {
                let mut v = v.clone();
                if let Some(t) = tags.get(&v.name) {
                    v.ty = Some(t.clone());
                }
                Term::Var(v)
            })
        })
        .collect())
}
