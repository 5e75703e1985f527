//! `slalog`: check, query, run and bench rule-based service level agreements.
//!
//! Exit codes: 0 success, 1 failing checks or rejected query, 2 parse or load
//! error, 3 out-of-order event stream, 4 any other runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use slalog_core::bench::{run_bench, Profile, BENCH_HEADER};
use slalog_core::eca::EngineConfig;
use slalog_core::lang::{load_files, parse_query, LoadedContract};
use slalog_core::report::run_monitor;
use slalog_core::stream::{parse_events, StreamEvent};
use slalog_core::vnv::run_suite;
use slalog_core::wfs::solve;
use slalog_core::Error;

#[derive(Parser)]
#[command(name = "slalog", version, about = "Declarative SLA rule engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test suite against a contract.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        suite: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the JSON report instead of the text summary.
        #[arg(long)]
        json: bool,
    },
    /// Answer a query under the well-founded semantics.
    Query {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// The query, written as a rule body.
        #[arg(last = true)]
        query_tail: Vec<String>,
    },
    /// Monitor an event log and write a run report.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        report: PathBuf,
        /// Period (ms) for ECA rules without an explicit schedule.
        #[arg(long, default_value_t = 1000)]
        tick_default: u64,
        /// Tolerated timestamp regression (ms) before a stream is rejected.
        #[arg(long, default_value_t = 0)]
        reorder_window: u64,
        /// Write notifications as JSON lines.
        #[arg(long)]
        notifications: Option<PathBuf>,
    },
    /// Time a generated program.
    Bench {
        #[arg(long, value_enum)]
        profile: BenchProfile,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        size: u64,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchProfile {
    Chain,
    Tc,
    Win,
    Defeasible,
    All,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Io(_) => fail(2, e.to_string()),
            _ => fail(4, e.to_string()),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| fail(4, format!("{}: {e}", path.display())))
}

fn load(files: &[PathBuf]) -> Result<LoadedContract, Failure> {
    Ok(load_files(files)?)
}

fn check(files: &[PathBuf], suite: &Path, report: Option<&Path>, json: bool) -> Result<u8, Failure> {
    let mut paths = files.to_vec();
    paths.push(suite.to_path_buf());
    let contract = load(&paths)?;
    let kb = contract.knowledge_base()?;
    let result = run_suite(&kb, &contract.tests(), &contract.fixtures);
    if json {
        print!("{}", result.to_json());
    } else {
        println!("{result}");
    }
    if let Some(path) = report {
        write(path, &result.to_json())?;
    }
    Ok(if result.ok() { 0 } else { 1 })
}

fn query(files: &[PathBuf], text: &str) -> Result<u8, Failure> {
    let contract = load(files)?;
    let kb = contract.knowledge_base()?;
    let q = parse_query(text).map_err(|e| fail(2, e.to_string()))?;
    let answers = match solve(&kb, &q) {
        Ok(a) => a,
        Err(e) => return Err(fail(1, e.to_string())),
    };
    if answers.is_empty() {
        println!("no");
    }
    for a in answers {
        if a.bindings.is_empty() {
            println!("{}", a.truth.as_str());
        } else {
            let b: Vec<String> = a.bindings.iter().map(|(v, t)| format!("{v} = {t}")).collect();
            println!("{}  {}", b.join(", "), a.truth.as_str());
        }
    }
    Ok(0)
}

fn read_events(path: &Path) -> Result<Vec<StreamEvent>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    parse_events(&text, &path.display().to_string()).map_err(|e| fail(2, e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn run(
    files: &[PathBuf],
    events_path: &Path,
    horizon: u64,
    report: &Path,
    tick_default: u64,
    reorder_window: u64,
    notifications: Option<&Path>,
) -> Result<u8, Failure> {
    let contract = load(files)?;
    let events = read_events(events_path)?;
    let config = EngineConfig { default_period: tick_default, reorder_window };
    let run = match run_monitor(&contract, &events, horizon, config) {
        Ok(r) => r,
        Err(Error::OutOfOrder { position, t, previous }) => {
            let line = events.get(position - 1).map(|e| e.line).unwrap_or(position);
            return Err(fail(
                3,
                format!("{}:{line}: out-of-order event at t={t} after t={previous}", events_path.display()),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    write(report, &run.report.to_json())?;
    if let Some(path) = notifications {
        let lines: String = run.engine.notifications().iter().map(|n| n.to_json_line() + "\n").collect();
        write(path, &lines)?;
    }
    print!("{}", run.report);
    if let Some(l) = run.latency {
        println!("{l}");
    }
    Ok(0)
}

fn bench(profile: BenchProfile, size: usize, repeat: usize) -> u8 {
    let profiles = match profile {
        BenchProfile::Chain => vec![Profile::Chain],
        BenchProfile::Tc => vec![Profile::Tc],
        BenchProfile::Win => vec![Profile::Win],
        BenchProfile::Defeasible => vec![Profile::Defeasible],
        BenchProfile::All => Profile::ALL.to_vec(),
    };
    println!("{BENCH_HEADER}");
    for p in profiles {
        println!("{}", run_bench(p, size, repeat));
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { files, suite, report, json } => check(files, suite, report.as_deref(), *json),
        Command::Query { files, query_tail } => {
            // The query is the last positional argument unless given after `--`.
            let mut files = files.clone();
            let text = if query_tail.is_empty() {
                match files.pop() {
                    Some(q) if !files.is_empty() => q.to_string_lossy().into_owned(),
                    _ => {
                        eprintln!("error: expected contract files followed by a query");
                        return ExitCode::from(2);
                    }
                }
            } else {
                query_tail.join(" ")
            };
            query(&files, &text)
        }
        Command::Run { files, events, horizon, report, tick_default, reorder_window, notifications } => run(
            files,
            events,
            *horizon,
            report,
            *tick_default,
            *reorder_window,
            notifications.as_deref(),
        ),
        Command::Bench { profile, size, repeat } => Ok(bench(*profile, *size as usize, *repeat)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
