//! Python bindings: knowledge bases, queries, proofs, norms, monitoring and benchmarks.
//!
//! Terms cross the boundary as text in the rule syntax; truth values and
//! verdicts as lowercase strings.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use slalog_core::bench::{self, Profile};
use slalog_core::defeasible::{prove_in_kb, ProofTag, Verdict};
use slalog_core::eca::EngineConfig;
use slalog_core::event::{self, ensure_ec_axioms};
use slalog_core::lang::{self, LoadedContract};
use slalog_core::report::{self, RunReport};
use slalog_core::stream::parse_events;
use slalog_core::{deontic, vnv, wfs, Term, Update};

create_exception!(slalog, SlalogError, PyException);
create_exception!(slalog, ParseError, SlalogError);

fn err(e: impl Into<slalog_core::Error>) -> PyErr {
    match e.into() {
        slalog_core::Error::Parse(p) => ParseError::new_err(p.to_string()),
        other => SlalogError::new_err(other.to_string()),
    }
}

fn literal(text: &str) -> PyResult<slalog_core::Literal> {
    let mut q = lang::parse_query(text).map_err(err)?;
    if q.len() != 1 {
        return Err(SlalogError::new_err(format!("expected a single literal, got `{text}`")));
    }
    Ok(q.remove(0))
}

fn term(text: &str) -> PyResult<Term> {
    lang::parse_term(text).map_err(err)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "yes",
        Verdict::No => "no",
        Verdict::NotDerivable => "not_derivable",
    }
}

/// A unitized knowledge base with the standard built-in attachments.
#[pyclass(module = "slalog", skip_from_py_object)]
#[derive(Clone)]
struct KnowledgeBase {
    inner: slalog_core::KnowledgeBase,
}

#[pymethods]
impl KnowledgeBase {
    #[new]
    fn new() -> Self {
        KnowledgeBase { inner: slalog_core::KnowledgeBase::with_standard_library() }
    }

    /// Parses `text` (rule syntax, or XML when `origin` ends in .xml/.rbsla) and adds it as a module.
    /// Returns the module id.
    #[pyo3(signature = (text, origin = "python"))]
    fn add_program(&mut self, text: &str, origin: &str) -> PyResult<String> {
        let p = lang::parse_source(text, origin).map_err(err)?;
        let id = p.module.id.to_string();
        self.inner.add_module(p.module).map_err(err)?;
        Ok(id)
    }

    fn remove_module(&mut self, id: &str) -> PyResult<()> {
        self.inner.apply(vec![Update::RemoveModule(slalog_core::sym(id))]).map_err(err)?;
        Ok(())
    }

    fn modules(&self) -> Vec<String> {
        self.inner.modules().map(|m| m.id.to_string()).collect()
    }

    fn rule_count(&self) -> usize {
        self.inner.rule_count()
    }

    /// Answers as `(bindings, truth)` pairs; bindings map variable names to printed terms.
    fn query(&self, text: &str) -> PyResult<Vec<(BTreeMap<String, String>, String)>> {
        let q = lang::parse_query(text).map_err(err)?;
        let answers = wfs::solve(&self.inner, &q).map_err(err)?;
        Ok(answers
            .into_iter()
            .map(|a| {
                let b = a.bindings.iter().map(|(v, t)| (v.to_string(), t.to_string())).collect();
                (b, a.truth.as_str().to_string())
            })
            .collect())
    }

    /// Truth of a conjunctive query: "true", "false" or "undefined".
    fn truth(&self, text: &str) -> PyResult<String> {
        let q = lang::parse_query(text).map_err(err)?;
        Ok(wfs::truth_of_query(&self.inner, &q).map_err(err)?.as_str().to_string())
    }

    /// Defeasible proof of a ground literal. `tag` is one of +D, -D, +d, -d.
    #[pyo3(signature = (text, tag = "+d"))]
    fn prove(&self, text: &str, tag: &str) -> PyResult<String> {
        let tag = ProofTag::parse(tag).ok_or_else(|| SlalogError::new_err(format!("unknown proof tag `{tag}`")))?;
        let v = prove_in_kb(&self.inner, &literal(text)?, tag).map_err(err)?;
        Ok(verdict_str(v).to_string())
    }

    /// Appends `(event, t)` occurrences to the narrative.
    fn record_events(&mut self, events: Vec<(String, u64)>) -> PyResult<()> {
        let parsed = events.iter().map(|(e, t)| Ok((term(e)?, *t))).collect::<PyResult<Vec<_>>>()?;
        event::record_events(&mut self.inner, &parsed).map_err(err)?;
        Ok(())
    }

    fn holds_at(&mut self, fluent: &str, t: u64) -> PyResult<String> {
        ensure_ec_axioms(&mut self.inner).map_err(err)?;
        Ok(event::holds_at(&self.inner, &term(fluent)?, t).map_err(err)?.as_str().to_string())
    }

    /// `(status, since)` of a norm at time `t`.
    fn norm_state(&mut self, id: &str, t: u64) -> PyResult<(String, u64)> {
        ensure_ec_axioms(&mut self.inner).map_err(err)?;
        let s = deontic::norm_state(&self.inner, id, t).map_err(err)?;
        Ok((s.status.as_str().to_string(), s.since))
    }

    fn norm_states(&mut self, t: u64) -> PyResult<BTreeMap<String, (String, u64)>> {
        ensure_ec_axioms(&mut self.inner).map_err(err)?;
        let states = deontic::norm_states(&self.inner, t).map_err(err)?;
        Ok(states.into_iter().map(|(id, s)| (id.to_string(), (s.status.as_str().to_string(), s.since))).collect())
    }

    /// `(norm, t)` for every violation up to `t`.
    fn violations(&mut self, t: u64) -> PyResult<Vec<(String, u64)>> {
        ensure_ec_axioms(&mut self.inner).map_err(err)?;
        Ok(deontic::violations(&self.inner, t).map_err(err)?.into_iter().map(|(n, at)| (n.to_string(), at)).collect())
    }

    /// Atoms derived both positively and under explicit negation.
    fn check_consistency(&self) -> PyResult<Vec<String>> {
        Ok(wfs::check_consistency(&self.inner).map_err(err)?.iter().map(|a| a.to_string()).collect())
    }

    fn __repr__(&self) -> String {
        format!("KnowledgeBase(modules={:?}, rules={})", self.modules(), self.inner.rule_count())
    }
}

/// Contract files loaded together with their imports, libraries and fixtures.
#[pyclass(module = "slalog")]
struct Contract {
    inner: LoadedContract,
}

#[pymethods]
impl Contract {
    #[getter]
    fn id(&self) -> String {
        self.inner.contract_id()
    }

    fn knowledge_base(&self) -> PyResult<KnowledgeBase> {
        Ok(KnowledgeBase { inner: self.inner.knowledge_base().map_err(err)? })
    }

    /// Runs the loaded test cases; returns `(ok, report_json)`.
    fn run_suite(&self) -> PyResult<(bool, String)> {
        let kb = self.inner.knowledge_base().map_err(err)?;
        let r = vnv::run_suite(&kb, &self.inner.tests(), &self.inner.fixtures);
        Ok((r.ok(), r.to_json()))
    }

    /// Monitors a JSON Lines event log up to `horizon`.
    #[pyo3(signature = (events, horizon, tick_default = 1000))]
    fn run(&self, events: &str, horizon: u64, tick_default: u64) -> PyResult<Report> {
        let events = parse_events(events, "events").map_err(err)?;
        let config = EngineConfig { default_period: tick_default, ..EngineConfig::default() };
        let run = report::run_monitor(&self.inner, &events, horizon, config).map_err(err)?;
        Ok(Report { mean_latency_ms: run.latency.map(|l| l.mean_ms), inner: run.report })
    }
}

#[pyclass(module = "slalog")]
struct Report {
    inner: RunReport,
    #[pyo3(get)]
    mean_latency_ms: Option<f64>,
}

#[pymethods]
impl Report {
    #[getter]
    fn violations(&self) -> Vec<(String, u64)> {
        self.inner.violations.iter().map(|v| (v.norm.to_string(), v.t)).collect()
    }

    #[getter]
    fn fired_actions(&self) -> Vec<(u64, String)> {
        self.inner.fired_actions.iter().map(|f| (f.t, f.rule.to_string())).collect()
    }

    #[getter]
    fn penalties(&self) -> Vec<String> {
        self.inner.penalties.clone()
    }

    #[getter]
    fn norms(&self) -> BTreeMap<String, (String, u64)> {
        self.inner.norms.iter().map(|(id, s)| (id.to_string(), (s.status.as_str().to_string(), s.since))).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

#[pyfunction]
fn load(paths: Vec<String>) -> PyResult<Contract> {
    Ok(Contract { inner: lang::load_files(&paths).map_err(err)? })
}

/// Rule syntax to the XML serialization.
#[pyfunction]
fn to_xml(text: &str) -> PyResult<String> {
    Ok(lang::emit_rbsla(&lang::parse_program(text, "python").map_err(err)?))
}

/// XML serialization to rule syntax.
#[pyfunction]
fn from_xml(xml: &str) -> PyResult<String> {
    Ok(lang::print_program(&lang::parse_rbsla(xml, "python.rbsla").map_err(err)?))
}

/// Times a generated program; returns the row with values as strings.
#[pyfunction]
#[pyo3(signature = (profile, size, repeat = 1))]
fn run_bench(profile: &str, size: usize, repeat: usize) -> PyResult<BTreeMap<String, String>> {
    let p = Profile::parse(profile).ok_or_else(|| SlalogError::new_err(format!("unknown profile `{profile}`")))?;
    if size == 0 {
        return Err(SlalogError::new_err("size must be at least 1"));
    }
    let row = bench::run_bench(p, size, repeat);
    let mut out = BTreeMap::new();
    out.insert("profile".into(), p.as_str().into());
    out.insert("size".into(), row.size.to_string());
    out.insert("rules".into(), row.rules.to_string());
    out.insert("answers".into(), row.answers.to_string());
    out.insert("truth".into(), row.truth.map(|t| t.as_str()).unwrap_or("-").into());
    out.insert("mean_ms".into(), format!("{:.3}", row.mean_ms));
    out.insert("tables".into(), row.tables.to_string());
    if let Some(e) = row.error {
        out.insert("error".into(), e);
    }
    Ok(out)
}

#[pymodule]
fn slalog(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SlalogError", m.py().get_type::<SlalogError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add_class::<KnowledgeBase>()?;
    m.add_class::<Contract>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(to_xml, m)?)?;
    m.add_function(wrap_pyfunction!(from_xml, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
