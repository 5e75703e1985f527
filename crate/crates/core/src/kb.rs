//! Unitized knowledge base: rule modules keyed by id, updated in transactions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::attach::{AttachmentContract, AttachmentFn, AttachmentRegistry};
use crate::deontic::{Deadline, Norm, NormKind};
use crate::error::KbError;
use crate::taxonomy::{TypeContext, TypeHierarchy};
use crate::term::{sym, Atom, Constant, Literal, PredKey, Rule, RuleKind, Sym, Term, Var, ROOT_TYPE};

/// Module receiving facts asserted by actions.
pub const DYNAMIC_MODULE: &str = "dynamic";
/// Module receiving ingested `happens/2` facts.
pub const NARRATIVE_MODULE: &str = "narrative";

/// Predicates the solver evaluates itself.
pub const BUILTIN_PREDICATES: [(&str, usize); 3] = [("true", 0), ("fail", 0), ("=", 2)];

/// Denial: the knowledge base is inconsistent whenever the body succeeds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegrityConstraint {
    pub body: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleModule {
    pub id: Sym,
    pub rules: Vec<Rule>,
    pub facts: Vec<Literal>,
    /// `(winner, loser)` rule labels.
    pub priorities: Vec<(Sym, Sym)>,
    pub constraints: Vec<IntegrityConstraint>,
    /// `(subtype, supertype)` edges.
    pub taxonomy: Vec<(Sym, Sym)>,
    pub norms: Vec<Norm>,
}

impl RuleModule {
    pub fn new(id: &str) -> Self {
        RuleModule {
            id: sym(id),
            rules: Vec::new(),
            facts: Vec::new(),
            priorities: Vec::new(),
            constraints: Vec::new(),
            taxonomy: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
            && self.facts.is_empty()
            && self.priorities.is_empty()
            && self.constraints.is_empty()
            && self.taxonomy.is_empty()
            && self.norms.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Sym> {
        self.rules.iter().filter_map(|r| r.label.as_ref())
    }

    /// Checks that only need the module itself.
    pub fn validate(&self) -> Result<(), KbError> {
        let mut seen = HashSet::new();
        for label in self.labels() {
            if !seen.insert(label.clone()) {
                return Err(KbError::DuplicateLabel { module: self.id.to_string(), label: label.to_string() });
            }
        }
        for rule in &self.rules {
            check_rule(rule)?;
        }
        for c in &self.constraints {
            if c.body.is_empty() {
                return Err(KbError::EmptyConstraint(self.id.to_string()));
            }
            check_tags(&c.body.iter().collect::<Vec<_>>())?;
        }
        for f in &self.facts {
            if f.naf {
                return Err(KbError::UnsafeRule { rule: format!("{f}."), var: "-".into() });
            }
        }
        Ok(())
    }
}

fn check_tags(lits: &[&Literal]) -> Result<(), KbError> {
    let mut tags: HashMap<Sym, Option<Sym>> = HashMap::new();
    for lit in lits {
        for v in lit.atom.vars() {
            match tags.get(&v.name) {
                Some(prev) if prev != &v.ty => {
                    return Err(KbError::ConflictingTags {
                        var: v.name.to_string(),
                        first: prev.as_deref().unwrap_or(ROOT_TYPE).to_string(),
                        second: v.type_tag().to_string(),
                    })
                }
                _ => {
                    tags.insert(v.name.clone(), v.ty.clone());
                }
            }
        }
    }
    Ok(())
}

fn check_rule(rule: &Rule) -> Result<(), KbError> {
    let mut all: Vec<&Literal> = vec![&rule.head];
    all.extend(&rule.body);
    check_tags(&all)?;
    if rule.head.naf {
        return Err(KbError::UnsafeRule { rule: rule.to_string(), var: "-".into() });
    }
    let mut bound: HashSet<Sym> = rule.head.atom.vars().into_iter().map(|v| v.name).collect();
    for lit in rule.body.iter().filter(|l| !l.naf) {
        bound.extend(lit.atom.vars().into_iter().map(|v| v.name));
    }
    for lit in rule.body.iter().filter(|l| l.naf) {
        if let Some(v) = lit.atom.vars().into_iter().find(|v| !bound.contains(&v.name)) {
            return Err(KbError::UnsafeRule { rule: rule.to_string(), var: v.name.to_string() });
        }
    }
    Ok(())
}

/// Principal symbol of an argument, for clause indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum ArgKey {
    Const(Constant),
    Functor(Sym, usize),
}

impl ArgKey {
    fn of(t: &Term) -> Option<ArgKey> {
        match t {
            Term::Var(_) => None,
            Term::Const(c) => Some(ArgKey::Const(c.clone())),
            Term::Compound(c) => Some(ArgKey::Functor(c.functor.clone(), c.args.len())),
        }
    }
}

/// Location of a clause inside a module.
#[derive(Clone, Debug)]
pub struct ClauseRef {
    module: Arc<RuleModule>,
    slot: Slot,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Fact(usize),
    Rule(usize),
}

impl ClauseRef {
    pub fn head(&self) -> &Literal {
        match self.slot {
            Slot::Fact(i) => &self.module.facts[i],
            Slot::Rule(i) => &self.module.rules[i].head,
        }
    }

    pub fn body(&self) -> &[Literal] {
        match self.slot {
            Slot::Fact(_) => &[],
            Slot::Rule(i) => &self.module.rules[i].body,
        }
    }

    pub fn module_id(&self) -> &Sym {
        &self.module.id
    }
}

#[derive(Debug, Default)]
struct Derived {
    types: TypeContext,
    /// Strict rules and facts by head predicate; this is what the solver sees.
    index: HashMap<PredKey, Vec<ClauseRef>>,
    /// Positions in `index` by the principal symbol of the head's first argument.
    by_first: HashMap<(PredKey, ArgKey), Vec<usize>>,
    /// Positions in `index` whose head has a variable first argument.
    open_first: HashMap<PredKey, Vec<usize>>,
    /// Head predicates of every rule kind, for collision checks.
    defined: HashSet<(Sym, usize)>,
}

/// Result of a successful transaction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangeSummary {
    pub added: Vec<Sym>,
    pub removed: Vec<Sym>,
    pub asserted: usize,
    pub retracted: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Update {
    AddModule(RuleModule),
    RemoveModule(Sym),
    /// Appends a fact to `module`, creating the module when absent.
    AssertFact { module: Sym, fact: Literal },
    /// Removes the first occurrence of a fact from whichever module holds it.
    RetractFact { fact: Literal },
}

/// Immutable-once-built collection of rule modules plus derived indexes.
///
/// Cloning is cheap (modules are reference counted), so a clone serves as a
/// read snapshot for concurrent queries while a writer prepares the next state.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    modules: BTreeMap<Sym, Arc<RuleModule>>,
    registry: AttachmentRegistry,
    derived: Arc<Derived>,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.modules == other.modules && self.registry == other.registry
    }
}

impl KnowledgeBase {
    /// Empty knowledge base without attachments.
    pub fn new() -> Self {
        KnowledgeBase { modules: BTreeMap::new(), registry: AttachmentRegistry::new(), derived: Arc::new(Derived::default()) }
    }

    /// Empty knowledge base with the arithmetic/comparison attachments registered.
    pub fn with_standard_library() -> Self {
        let mut kb = Self::new();
        kb.registry.ensure_standard();
        kb
    }

    pub fn ensure_standard_library(&mut self) -> Result<(), KbError> {
        for (name, contract, _) in crate::attach::standard_library() {
            if self.derived.defined.contains(&(sym(name), contract.arity())) {
                return Err(KbError::AttachmentCollision(format!("{name}/{}", contract.arity())));
            }
        }
        self.registry.ensure_standard();
        Ok(())
    }

    pub fn modules(&self) -> impl Iterator<Item = &RuleModule> {
        self.modules.values().map(|m| &**m)
    }

    pub fn module(&self, id: &str) -> Option<&RuleModule> {
        self.modules.get(id).map(|m| &**m)
    }

    pub fn contains_module(&self, id: &str) -> bool {
        self.modules.contains_key(id)
    }

    pub fn registry(&self) -> &AttachmentRegistry {
        &self.registry
    }

    pub fn types(&self) -> &TypeContext {
        &self.derived.types
    }

    pub fn clauses(&self, key: &PredKey) -> &[ClauseRef] {
        self.derived.index.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Clauses for `key` whose head could match a call with first argument
    /// `first`, in declaration order.
    pub fn candidate_clauses<'s>(&'s self, key: &PredKey, first: Option<&Term>) -> Vec<&'s ClauseRef> {
        let all = self.clauses(key);
        let Some(k) = first.and_then(ArgKey::of) else {
            return all.iter().collect();
        };
        let d = &self.derived;
        let fixed = d.by_first.get(&(key.clone(), k)).map(Vec::as_slice).unwrap_or(&[]);
        let open = d.open_first.get(key).map(Vec::as_slice).unwrap_or(&[]);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(fixed.len() + open.len());
        while i < fixed.len() || j < open.len() {
            let take_fixed = j == open.len() || (i < fixed.len() && fixed[i] < open[j]);
            let pos = if take_fixed { &mut i } else { &mut j };
            out.push(&all[if take_fixed { fixed[*pos] } else { open[*pos] }]);
            *pos += 1;
        }
        out
    }

    /// Head predicates of strict rules and facts.
    pub fn predicates(&self) -> impl Iterator<Item = &PredKey> {
        self.derived.index.keys()
    }

    pub fn defines(&self, name: &str, arity: usize) -> bool {
        self.derived.defined.contains(&(sym(name), arity))
    }

    pub fn norms(&self) -> impl Iterator<Item = &Norm> {
        self.modules().flat_map(|m| m.norms.iter())
    }

    pub fn norm(&self, id: &str) -> Option<&Norm> {
        self.norms().find(|n| &*n.id == id)
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&Sym, &IntegrityConstraint)> {
        self.modules().flat_map(|m| m.constraints.iter().map(move |c| (&m.id, c)))
    }

    pub fn facts(&self) -> impl Iterator<Item = &Literal> {
        self.modules().flat_map(|m| m.facts.iter())
    }

    pub fn rule_count(&self) -> usize {
        self.modules().map(|m| m.rules.len() + m.facts.len()).sum()
    }

    /// Reflexive-transitive subtype test over the merged taxonomy.
    pub fn subtype_of(&self, t1: &str, t2: &str) -> Result<bool, KbError> {
        self.derived.types.hierarchy.subtype_of(t1, t2)
    }

    /// Registers a procedural attachment under `name/arity`.
    pub fn register_attachment(
        &mut self,
        name: &str,
        arity: usize,
        contract: AttachmentContract,
        func: AttachmentFn,
    ) -> Result<(), KbError> {
        if contract.arity() != arity {
            return Err(KbError::AttachmentCollision(format!(
                "{name}/{arity}: contract declares {} argument modes",
                contract.arity()
            )));
        }
        if self.defines(name, arity) {
            return Err(KbError::AttachmentCollision(format!("{name}/{arity}")));
        }
        if BUILTIN_PREDICATES.contains(&(name, arity)) {
            return Err(KbError::ReservedPredicate(format!("{name}/{arity}")));
        }
        self.registry.insert(name, contract, func)
    }

    /// Applies `updates` atomically and in order. On error the knowledge base
    /// is left untouched.
    pub fn apply(&mut self, updates: Vec<Update>) -> Result<ChangeSummary, KbError> {
        if updates.is_empty() {
            return Err(KbError::EmptyUpdate);
        }
        let mut modules = self.modules.clone();
        let mut summary = ChangeSummary::default();
        for update in updates {
            match update {
                Update::AddModule(m) => {
                    if modules.contains_key(&m.id) {
                        return Err(KbError::DuplicateModule(m.id.to_string()));
                    }
                    m.validate()?;
                    summary.added.push(m.id.clone());
                    modules.insert(m.id.clone(), Arc::new(m));
                }
                Update::RemoveModule(id) => {
                    if modules.remove(&id).is_none() {
                        return Err(KbError::MissingModule(id.to_string()));
                    }
                    summary.removed.push(id);
                }
                Update::AssertFact { module, fact } => {
                    if fact.naf {
                        return Err(KbError::UnsafeRule { rule: format!("{fact}."), var: "-".into() });
                    }
                    let m = modules.entry(module.clone()).or_insert_with(|| Arc::new(RuleModule::new(&module)));
                    Arc::make_mut(m).facts.push(fact);
                    summary.asserted += 1;
                }
                Update::RetractFact { fact } => {
                    let holder = modules.iter().find(|(_, m)| m.facts.contains(&fact)).map(|(id, _)| id.clone());
                    let Some(id) = holder else {
                        return Err(KbError::MissingFact(fact.to_string()));
                    };
                    let m = Arc::make_mut(modules.get_mut(&id).expect("holder exists"));
                    let pos = m.facts.iter().position(|f| f == &fact).expect("holder contains fact");
                    m.facts.remove(pos);
                    summary.retracted += 1;
                }
            }
        }
        let derived = derive(&modules, &self.registry, &mut summary.warnings)?;
        self.modules = modules;
        self.derived = Arc::new(derived);
        Ok(summary)
    }

    /// Convenience wrapper adding one module.
    pub fn add_module(&mut self, module: RuleModule) -> Result<ChangeSummary, KbError> {
        self.apply(vec![Update::AddModule(module)])
    }

    /// Types of a symbol as asserted via `type(c, T)` facts.
    pub fn asserted_types(&self, c: &str) -> Vec<Sym> {
        self.derived.types.assertions.get(c).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }
}

fn derive(
    modules: &BTreeMap<Sym, Arc<RuleModule>>,
    registry: &AttachmentRegistry,
    warnings: &mut Vec<String>,
) -> Result<Derived, KbError> {
    let mut edges: Vec<(Sym, Sym)> = Vec::new();
    let mut assertions: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
    let mut index: HashMap<PredKey, Vec<ClauseRef>> = HashMap::new();
    let mut defined = HashSet::new();

    for m in modules.values() {
        edges.extend(m.taxonomy.iter().cloned());
        for (i, f) in m.facts.iter().enumerate() {
            if let Some((c, t)) = type_assertion(f) {
                assertions.entry(c).or_default().insert(t);
            }
            index.entry(f.pred_key()).or_default().push(ClauseRef { module: m.clone(), slot: Slot::Fact(i) });
            defined.insert((f.atom.pred.clone(), f.atom.arity()));
        }
        for (i, r) in m.rules.iter().enumerate() {
            defined.insert((r.head.atom.pred.clone(), r.head.atom.arity()));
            if r.kind == RuleKind::Strict {
                index.entry(r.head.pred_key()).or_default().push(ClauseRef { module: m.clone(), slot: Slot::Rule(i) });
            }
        }
    }

    for (name, arity) in &defined {
        if registry.contains(name, *arity) {
            return Err(KbError::AttachmentCollision(format!("{name}/{arity}")));
        }
        if BUILTIN_PREDICATES.contains(&(&**name, *arity)) {
            return Err(KbError::ReservedPredicate(format!("{name}/{arity}")));
        }
    }

    // Types used only in assertions hang directly under the root.
    let declared: HashSet<Sym> = edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    for tys in assertions.values() {
        for t in tys {
            if !declared.contains(t) && &**t != ROOT_TYPE {
                edges.push((t.clone(), sym(ROOT_TYPE)));
            }
        }
    }
    let hierarchy = TypeHierarchy::new(edges)?;

    let check_var = |v: &Var| -> Result<(), KbError> {
        match &v.ty {
            Some(t) if !hierarchy.is_declared(t) => Err(KbError::UnknownType(t.to_string())),
            _ => Ok(()),
        }
    };
    for m in modules.values() {
        for r in &m.rules {
            r.vars().iter().try_for_each(check_var)?;
        }
        for c in &m.constraints {
            for l in &c.body {
                l.atom.vars().iter().try_for_each(check_var)?;
            }
        }
    }

    check_norms(modules)?;

    let labels: HashSet<&Sym> = modules.values().flat_map(|m| m.labels()).collect();
    for m in modules.values() {
        for (w, l) in &m.priorities {
            for label in [w, l] {
                if !labels.contains(label) {
                    warnings.push(format!("module `{}`: priority refers to unknown rule label `{label}`", m.id));
                }
            }
        }
    }

    let mut by_first: HashMap<(PredKey, ArgKey), Vec<usize>> = HashMap::new();
    let mut open_first: HashMap<PredKey, Vec<usize>> = HashMap::new();
    for (key, clauses) in &index {
        for (i, c) in clauses.iter().enumerate() {
            match c.head().atom.args.first().and_then(ArgKey::of) {
                Some(k) => by_first.entry((key.clone(), k)).or_default().push(i),
                None => open_first.entry(key.clone()).or_default().push(i),
            }
        }
    }

    Ok(Derived { types: TypeContext::new(hierarchy, assertions), index, by_first, open_first, defined })
}

fn type_assertion(f: &Literal) -> Option<(Sym, Sym)> {
    if f.neg || &*f.atom.pred != "type" || f.atom.args.len() != 2 {
        return None;
    }
    match (&f.atom.args[0], &f.atom.args[1]) {
        (Term::Const(c), Term::Const(t)) => Some((c.as_symbol()?.clone(), t.as_symbol()?.clone())),
        _ => None,
    }
}

fn check_norms(modules: &BTreeMap<Sym, Arc<RuleModule>>) -> Result<(), KbError> {
    let mut by_id: BTreeMap<&Sym, &Norm> = BTreeMap::new();
    for n in modules.values().flat_map(|m| m.norms.iter()) {
        if by_id.insert(&n.id, n).is_some() {
            return Err(KbError::Norm(format!("duplicate norm id `{}`", n.id)));
        }
        match (n.kind, &n.deadline) {
            (NormKind::Permission, Some(Deadline::Relative(_) | Deadline::Absolute(_))) => {
                return Err(KbError::Norm(format!("permission `{}` cannot carry a deadline", n.id)))
            }
            (NormKind::Obligation | NormKind::Prohibition, None) => {
                return Err(KbError::Norm(format!(
                    "norm `{}` needs a deadline or must be declared standing",
                    n.id
                )))
            }
            _ => {}
        }
    }
    for n in by_id.values() {
        let mut seen = HashSet::new();
        let mut cur = *n;
        while let Some(rep) = &cur.reparation {
            if !seen.insert(cur.id.clone()) {
                return Err(KbError::Norm(format!("reparation cycle through `{}`", cur.id)));
            }
            cur = by_id
                .get(rep)
                .ok_or_else(|| KbError::Norm(format!("norm `{}` names unknown reparation `{rep}`", cur.id)))?;
        }
    }
    Ok(())
}

/// Ground fact helper used across the crate.
pub(crate) fn fact(pred: &str, args: Vec<Term>) -> Literal {
    Literal::pos(Atom::new(pred, args))
}
