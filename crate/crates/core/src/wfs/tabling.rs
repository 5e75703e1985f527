//! Tabled resolution over call variants, run from an explicit worklist.

use std::collections::{HashMap, HashSet};

use super::{SolveOptions, SolveStats};
use crate::error::SolveError;
use crate::kb::KnowledgeBase;
use crate::term::{sym, Atom, Literal, PredKey, Sym, Term, Var};
use crate::unify::{Subst, Unifier};

pub(crate) type AtomId = usize;
type TableId = usize;

/// A ground clause instance `head <- pos, not neg` discovered during evaluation.
#[derive(Clone, Debug)]
pub(crate) struct Instance {
    pub head: AtomId,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

/// A partially resolved clause body feeding a table.
#[derive(Clone, Debug)]
struct Frame {
    table: TableId,
    head: Literal,
    goals: Vec<Literal>,
    pos: Vec<AtomId>,
    neg: Vec<AtomId>,
}

struct Consumer {
    frame: Frame,
    selected: Literal,
}

struct Table {
    call: Literal,
    answers: Vec<AtomId>,
    answer_set: HashSet<AtomId>,
    consumers: Vec<usize>,
}

enum Task {
    Evaluate(TableId),
    Resume(usize, AtomId),
    Run(Frame),
}

/// Renames variables to `#0, #1, ..` in order of first occurrence, keeping type tags.
pub(crate) fn canonical(l: &Literal) -> Literal {
    let mut seen: Vec<(Var, Term)> = Vec::new();
    let atom = l.atom.map_vars(&mut |v| {
        if let Some((_, t)) = seen.iter().find(|(w, _)| w.key() == v.key()) {
            return t.clone();
        }
        let t = Term::Var(Var { name: sym(&format!("#{}", seen.len())), ty: v.ty.clone(), scope: 0 });
        seen.push((v.clone(), t.clone()));
        t
    });
    Literal { atom, neg: l.neg, naf: false }
}

fn rename(l: &Literal, scope: u32) -> Literal {
    l.map_vars(&mut |v| Term::Var(Var { scope, ..v.clone() }))
}

fn literal_depth(l: &Literal) -> usize {
    l.atom.args.iter().map(Term::depth).max().unwrap_or(0)
}

pub(crate) struct Engine<'a> {
    kb: &'a KnowledgeBase,
    opts: &'a SolveOptions,
    unifier: Unifier<'a>,
    atoms: Vec<Literal>,
    atom_ids: HashMap<Literal, AtomId>,
    tables: Vec<Table>,
    table_ids: HashMap<Literal, TableId>,
    consumers: Vec<Consumer>,
    tasks: Vec<Task>,
    pub instances: Vec<Instance>,
    pub query_vars: Vec<Sym>,
    steps: u64,
    next_scope: u32,
}

impl<'a> Engine<'a> {
    pub fn new(kb: &'a KnowledgeBase, opts: &'a SolveOptions) -> Self {
        Engine {
            kb,
            opts,
            unifier: Unifier::new(kb.types()).with_occurs_check(opts.occurs_check),
            atoms: Vec::new(),
            atom_ids: HashMap::new(),
            tables: Vec::new(),
            table_ids: HashMap::new(),
            consumers: Vec::new(),
            tasks: Vec::new(),
            instances: Vec::new(),
            query_vars: Vec::new(),
            steps: 0,
            next_scope: 1,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, id: AtomId) -> &Literal {
        &self.atoms[id]
    }

    pub fn answers_of(&self, t: TableId) -> &[AtomId] {
        &self.tables[t].answers
    }

    pub fn stats(&self) -> SolveStats {
        SolveStats {
            steps: self.steps,
            tables: self.tables.len(),
            answers: self.tables.iter().map(|t| t.answers.len()).sum(),
            instances: self.instances.len(),
        }
    }

    fn intern(&mut self, l: Literal) -> AtomId {
        if let Some(&id) = self.atom_ids.get(&l) {
            return id;
        }
        let id = self.atoms.len();
        self.atoms.push(l.clone());
        self.atom_ids.insert(l, id);
        id
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps > self.opts.step_budget {
            return Err(SolveError::ResourceExceeded(format!("step budget of {} exhausted", self.opts.step_budget)));
        }
        Ok(())
    }

    fn fresh_scope(&mut self) -> u32 {
        let s = self.next_scope;
        self.next_scope += 1;
        s
    }

    fn check_depth(&self, l: &Literal) -> Result<(), SolveError> {
        if literal_depth(l) > self.opts.depth_bound {
            return Err(SolveError::ResourceExceeded(format!(
                "term depth exceeds {} in `{}`",
                self.opts.depth_bound,
                l.atom.pred
            )));
        }
        Ok(())
    }

    fn table_for(&mut self, lit: &Literal) -> Result<TableId, SolveError> {
        let call = canonical(lit);
        if let Some(&t) = self.table_ids.get(&call) {
            return Ok(t);
        }
        self.check_depth(&call)?;
        let id = self.tables.len();
        self.tables.push(Table { call: call.clone(), answers: Vec::new(), answer_set: HashSet::new(), consumers: Vec::new() });
        self.table_ids.insert(call, id);
        self.tasks.push(Task::Evaluate(id));
        Ok(id)
    }

    /// Tables the query and evaluates to completion; returns the query table.
    pub fn run_query(&mut self, query: &[Literal]) -> Result<TableId, SolveError> {
        let mut vars: Vec<Var> = Vec::new();
        for l in query {
            l.atom.args.iter().for_each(|a| a.collect_vars(&mut vars));
        }
        self.query_vars = vars.iter().map(|v| v.name.clone()).collect();
        let head = Literal::pos(Atom { pred: sym("$query"), args: vars.into_iter().map(Term::Var).collect() });
        let id = self.tables.len();
        self.tables.push(Table { call: head.clone(), answers: Vec::new(), answer_set: HashSet::new(), consumers: Vec::new() });
        self.tasks.push(Task::Run(Frame { table: id, head, goals: query.to_vec(), pos: Vec::new(), neg: Vec::new() }));
        while let Some(task) = self.tasks.pop() {
            match task {
                Task::Evaluate(t) => self.evaluate(t)?,
                Task::Resume(c, a) => self.resume(c, a)?,
                Task::Run(f) => self.run(f)?,
            }
        }
        Ok(id)
    }

    fn evaluate(&mut self, t: TableId) -> Result<(), SolveError> {
        let call = self.tables[t].call.clone();
        let key = PredKey { name: call.atom.pred.clone(), arity: call.atom.arity(), neg: call.neg };
        let kb = self.kb;
        for clause in kb.candidate_clauses(&key, call.atom.args.first()) {
            self.tick()?;
            let scope = self.fresh_scope();
            let head = rename(clause.head(), scope);
            let mut s = Subst::new();
            if !self.unifier.unify_atoms(&call.atom, &head.atom, &mut s) {
                continue;
            }
            let goals = clause.body().iter().map(|g| s.resolve_literal(&rename(g, scope))).collect();
            self.tasks.push(Task::Run(Frame {
                table: t,
                head: s.resolve_literal(&call),
                goals,
                pos: Vec::new(),
                neg: Vec::new(),
            }));
        }
        Ok(())
    }

    fn resume(&mut self, c: usize, answer: AtomId) -> Result<(), SolveError> {
        self.tick()?;
        let scope = self.fresh_scope();
        let ans = rename(&self.atoms[answer], scope);
        let consumer = &self.consumers[c];
        let mut s = Subst::new();
        if !self.unifier.unify_atoms(&consumer.selected.atom, &ans.atom, &mut s) {
            return Ok(());
        }
        let f = &consumer.frame;
        let mut pos = f.pos.clone();
        pos.push(answer);
        let frame = Frame {
            table: f.table,
            head: s.resolve_literal(&f.head),
            goals: f.goals.iter().map(|g| s.resolve_literal(g)).collect(),
            pos,
            neg: f.neg.clone(),
        };
        self.tasks.push(Task::Run(frame));
        Ok(())
    }

    fn is_ready(&self, g: &Literal) -> bool {
        super::is_ready(self.kb, g)
    }

    fn run(&mut self, mut frame: Frame) -> Result<(), SolveError> {
        loop {
            let Some(i) = frame.goals.iter().position(|g| self.is_ready(g)) else {
                if frame.goals.is_empty() {
                    return self.complete(frame);
                }
                let stuck: Vec<String> = frame.goals.iter().map(|g| g.to_string()).collect();
                return Err(SolveError::Instantiation(format!(
                    "no goal can be selected among `{}`: arguments are insufficiently instantiated",
                    stuck.join(", ")
                )));
            };
            let goal = frame.goals.remove(i);
            if goal.neg || !self.is_builtin_or_attachment(&goal) {
                if goal.naf {
                    let pos = Literal { naf: false, ..goal };
                    self.table_for(&pos)?;
                    let id = self.intern(canonical(&pos));
                    frame.neg.push(id);
                    continue;
                }
                let t = self.table_for(&goal)?;
                let c = self.consumers.len();
                self.consumers.push(Consumer { frame, selected: goal });
                self.tables[t].consumers.push(c);
                for k in 0..self.tables[t].answers.len() {
                    let a = self.tables[t].answers[k];
                    self.tasks.push(Task::Resume(c, a));
                }
                return Ok(());
            }
            // Builtins and attachments are evaluated in place.
            let rows = self.call_builtin(&goal)?;
            let mut frames = Vec::new();
            for s in rows {
                frames.push(Frame {
                    table: frame.table,
                    head: s.resolve_literal(&frame.head),
                    goals: frame.goals.iter().map(|g| s.resolve_literal(g)).collect(),
                    pos: frame.pos.clone(),
                    neg: frame.neg.clone(),
                });
            }
            match frames.len() {
                0 => return Ok(()),
                1 => frame = frames.pop().expect("one frame"),
                _ => {
                    self.tasks.extend(frames.into_iter().map(Task::Run));
                    return Ok(());
                }
            }
        }
    }

    fn is_builtin_or_attachment(&self, g: &Literal) -> bool {
        super::is_builtin_or_attachment(self.kb, g)
    }

    fn call_builtin(&mut self, goal: &Literal) -> Result<Vec<Subst>, SolveError> {
        if !matches!((&*goal.atom.pred, goal.atom.arity()), ("true", 0) | ("fail", 0) | ("=", 2)) {
            self.tick()?;
        }
        super::call_builtin(self.kb, &self.unifier, goal)
    }

    fn complete(&mut self, frame: Frame) -> Result<(), SolveError> {
        let head = canonical(&frame.head);
        self.check_depth(&head)?;
        let id = self.intern(head);
        self.instances.push(Instance { head: id, pos: frame.pos, neg: frame.neg });
        let table = &mut self.tables[frame.table];
        if !table.answer_set.insert(id) {
            return Ok(());
        }
        table.answers.push(id);
        for &c in &table.consumers {
            self.tasks.push(Task::Resume(c, id));
        }
        Ok(())
    }
}
