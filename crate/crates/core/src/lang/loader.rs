//! Loads contract files with their imports, ECA module libraries and test fixtures.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{parse_source, Program};
use crate::eca::{EcaEngine, EcaRule, EngineConfig};
use crate::event::ensure_ec_axioms;
use crate::error::{Error, ParseError};
use crate::kb::{KnowledgeBase, RuleModule, Update};
use crate::term::{Constant, Term};
use crate::vnv::TestCase;

#[derive(Clone, Debug, Default)]
pub struct LoadedContract {
    /// Parsed files, imports before importers.
    pub programs: Vec<(PathBuf, Program)>,
    /// Modules named by `add_module("path")` actions, keyed by the path as written.
    pub library: BTreeMap<String, RuleModule>,
    /// Test fixtures keyed by the `given` path as written; load failures are kept per fixture.
    pub fixtures: BTreeMap<String, Result<RuleModule, String>>,
}

impl LoadedContract {
    pub fn modules(&self) -> impl Iterator<Item = &RuleModule> {
        self.programs.iter().map(|(_, p)| &p.module)
    }

    pub fn eca_rules(&self) -> Vec<EcaRule> {
        self.programs.iter().flat_map(|(_, p)| p.eca.iter().cloned()).collect()
    }

    pub fn tests(&self) -> Vec<TestCase> {
        self.programs.iter().flat_map(|(_, p)| p.tests.iter().cloned()).collect()
    }

    /// Id of the last loaded file's module, which names the contract.
    pub fn contract_id(&self) -> String {
        self.programs.last().map(|(_, p)| p.module.id.to_string()).unwrap_or_default()
    }

    /// An engine over the knowledge base (with the event calculus axioms),
    /// the ECA rules and the add_module library.
    pub fn engine(&self, config: EngineConfig) -> Result<EcaEngine, Error> {
        let mut kb = self.knowledge_base()?;
        ensure_ec_axioms(&mut kb)?;
        Ok(EcaEngine::new(kb, self.eca_rules()).with_config(config).with_library(self.library.clone()))
    }

    /// Knowledge base holding every loaded module plus the standard attachments,
    /// built in a single transaction.
    pub fn knowledge_base(&self) -> Result<KnowledgeBase, Error> {
        let mut kb = KnowledgeBase::with_standard_library();
        let updates: Vec<Update> = self.modules().cloned().map(Update::AddModule).collect();
        if !updates.is_empty() {
            kb.apply(updates)?;
        }
        Ok(kb)
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

struct Loader {
    out: LoadedContract,
    done: HashSet<PathBuf>,
    stack: Vec<PathBuf>,
}

impl Loader {
    fn load(&mut self, path: &Path) -> Result<(), Error> {
        let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if let Some(pos) = self.stack.iter().position(|p| *p == key) {
            let cycle: Vec<String> =
                self.stack[pos..].iter().chain([&key]).map(|p| p.display().to_string()).collect();
            return Err(ParseError::single(&path.display().to_string(), 1, 1, format!("import cycle: {}", cycle.join(" -> ")))
                .into());
        }
        if self.done.contains(&key) {
            return Ok(());
        }
        let text = read(path)?;
        let origin = path.display().to_string();
        let program = parse_source(&text, &origin)?;
        self.stack.push(key.clone());
        let dir = base_dir(path);
        for import in &program.imports {
            self.load(&dir.join(import))?;
        }
        self.stack.pop();
        self.collect_library(&program, &dir)?;
        self.collect_fixtures(&program, &dir);
        self.done.insert(key);
        self.out.programs.push((path.to_path_buf(), program));
        Ok(())
    }

    fn collect_library(&mut self, program: &Program, dir: &Path) -> Result<(), Error> {
        let actions = program.eca.iter().flat_map(|e| e.action.iter().chain(e.else_action.iter().flatten()));
        for lit in actions {
            if &*lit.atom.pred != "add_module" || lit.atom.args.len() != 1 {
                continue;
            }
            let raw = match &lit.atom.args[0] {
                Term::Const(Constant::Text(s) | Constant::Symbol(s)) => s.to_string(),
                _ => continue,
            };
            if self.out.library.contains_key(&raw) {
                continue;
            }
            let path = dir.join(&raw);
            let text = read(&path)?;
            let lib = parse_source(&text, &path.display().to_string())?;
            self.out.library.insert(raw, lib.module);
        }
        Ok(())
    }

    fn collect_fixtures(&mut self, program: &Program, dir: &Path) {
        for t in &program.tests {
            let Some(given) = &t.given else { continue };
            if self.out.fixtures.contains_key(given) {
                continue;
            }
            let path = dir.join(given);
            let loaded = read(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| parse_source(&text, &path.display().to_string()).map_err(|e| e.to_string()))
                .map(|p| p.module);
            self.out.fixtures.insert(given.clone(), loaded);
        }
    }
}

/// Loads each file (and, transitively, its imports). Every file becomes one module.
pub fn load_files<P: AsRef<Path>>(paths: &[P]) -> Result<LoadedContract, Error> {
    let mut loader = Loader { out: LoadedContract::default(), done: HashSet::new(), stack: Vec::new() };
    for p in paths {
        loader.load(p.as_ref())?;
    }
    Ok(loader.out)
}
