//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. An optional argument selects criteria by name.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;

use slalog_core::bench::{run_bench, Profile};
use slalog_core::defeasible::{compile, Conclusions, DefeasibleTheory, ProofTag, Verdict};
use slalog_core::deontic::Deadline;
use slalog_core::eca::{EcaEngine, EngineConfig};
use slalog_core::event::{ensure_ec_axioms, holds_at, simulate_timeline};
use slalog_core::lang::{emit_rbsla, load_files, parse_program, parse_query, parse_rbsla, print_program};
use slalog_core::report::run_monitor;
use slalog_core::stream::parse_events;
use slalog_core::wfs::{check_consistency, truth_of};
use slalog_core::{Atom, KnowledgeBase, Literal, Term, TruthValue};

/// Wall-clock limits, in seconds unless noted.
const WFS_LIMIT_S: f64 = 60.0;
const CHAIN_LIMIT_S: f64 = 5.0;
const TC_LIMIT_S: f64 = 10.0;
const SLA_EVENT_LIMIT_MS: f64 = 100.0;

fn verdict(n: u32, name: &str, ok: bool, detail: String) {
    let detail = detail.trim_end_matches([' ', ',']);
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} {name} failed");
}

fn main() {
    let criteria: [(&str, fn()); 9] = [
        ("c1_wfs_agrees_with_alternating_fixpoint", c1_wfs_agrees_with_alternating_fixpoint),
        ("c2_canonical_programs", c2_canonical_programs),
        ("c3_defeasible_coherence_and_compilation", c3_defeasible_coherence_and_compilation),
        ("c4_holds_at_matches_timeline_and_sweep", c4_holds_at_matches_timeline_and_sweep),
        ("c5_contrary_to_duty_scenario", c5_contrary_to_duty_scenario),
        ("c6_eca_determinism_and_atomicity", c6_eca_determinism_and_atomicity),
        ("c7_serialization_roundtrips_and_fuzzing", c7_serialization_roundtrips_and_fuzzing),
        ("c8_performance", c8_performance),
        ("c9_consistency_check", c9_consistency_check),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if catch_unwind(run).is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn kb_of(src: &str) -> KnowledgeBase {
    let p = parse_program(src, "acceptance").unwrap();
    let mut kb = KnowledgeBase::with_standard_library();
    kb.add_module(p.module).unwrap();
    kb
}

fn atom(name: &str) -> Literal {
    Literal::pos(Atom::new(name, vec![]))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sla").join(name)
}

fn c1_wfs_agrees_with_alternating_fixpoint() {
    let clock = Instant::now();
    let mut rng = common::rng(1);
    let mut mismatches = Vec::new();
    let programs = 1000;
    for i in 0..programs {
        let g = common::GroundProgram::random(&mut rng, 12, 24);
        let kb = kb_of(&g.source());
        for (a, want) in g.well_founded().into_iter().enumerate() {
            let got = truth_of(&kb, &atom(&format!("a{a}"))).unwrap();
            if got != want && mismatches.len() < 3 {
                mismatches.push(format!("program {i} a{a}: {got:?} vs {want:?}\n{}", g.source()));
            }
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    verdict(
        1,
        "wfs-vs-oracle",
        mismatches.is_empty() && secs < WFS_LIMIT_S,
        format!("{programs} programs, {secs:.1} s, limit {WFS_LIMIT_S} s, {}", mismatches.join("; ")),
    );
}

fn c2_canonical_programs() {
    let mut failures = Vec::new();
    let mut check = |src: &str, query: &str, want: TruthValue| {
        let kb = kb_of(src);
        let q = parse_query(query).unwrap();
        let got = truth_of(&kb, &q[0]).unwrap();
        if got != want {
            failures.push(format!("{query}: {got:?}, expected {want:?}"));
        }
    };
    let win = "move(a, b). move(b, a). move(b, c). win(X) :- move(X, Y), not win(Y).";
    check(win, "win(b)", TruthValue::True);
    check(win, "win(a)", TruthValue::False);
    check(win, "win(c)", TruthValue::False);
    let cycle = "move(a, b). move(b, a). win(X) :- move(X, Y), not win(Y).";
    check(cycle, "win(a)", TruthValue::Undefined);
    check("p :- not p.", "p", TruthValue::Undefined);
    check("p :- not q. q :- not p.", "q", TruthValue::Undefined);
    check("p :- q. q :- p.", "p", TruthValue::False);
    check("bird(t). fly(X) :- bird(X), not neg fly(X). neg fly(t).", "fly(t)", TruthValue::False);
    check("e(1, 2). e(2, 3). r(X, Y) :- e(X, Y). r(X, Y) :- r(X, Z), e(Z, Y).", "r(1, 3)", TruthValue::True);

    // Answers of the 3-node game, cross-checked against the reference fixpoint.
    let (g, names) = common::win_program(&[("a", "b"), ("b", "a"), ("b", "c")]);
    let reference: BTreeMap<_, _> = names.iter().cloned().zip(g.well_founded()).collect();
    if reference["win(b)"] != TruthValue::True || reference["win(a)"] != TruthValue::False {
        failures.push("reference fixpoint disagrees on the game".into());
    }
    verdict(2, "canonical-programs", failures.is_empty(), format!("9 queries and the reference game, {}", failures.join("; ")));
}

fn c3_defeasible_coherence_and_compilation() {
    let mut rng = common::rng(3);
    let mut problems = Vec::new();
    let theories = 500;
    let mut checked = 0usize;
    for i in 0..theories {
        let src = common::random_defeasible_source(&mut rng, 10);
        let p = parse_program(&src, "dl").unwrap();
        let t = DefeasibleTheory::from_modules([&p.module]).unwrap();
        let g = t.ground().unwrap();
        let c = Conclusions::compute(&g);
        let base = KnowledgeBase::with_standard_library();
        let mut kb = KnowledgeBase::with_standard_library();
        kb.add_module(compile(&t, "dl_meta", &base).unwrap()).unwrap();
        for l in g.literals() {
            let v = |tag| c.verdict(&g, l, tag) == Verdict::Yes;
            let (pd, md, pp, mp) =
                (v(ProofTag::PlusDelta), v(ProofTag::MinusDelta), v(ProofTag::PlusPartial), v(ProofTag::MinusPartial));
            let comp = l.complement();
            let pp_comp = c.verdict(&g, &comp, ProofTag::PlusPartial) == Verdict::Yes;
            let pd_comp = c.verdict(&g, &comp, ProofTag::PlusDelta) == Verdict::Yes;
            if pd && md || pp && mp {
                problems.push(format!("theory {i}: {l} both proved and refuted"));
            }
            if pd && !pp {
                problems.push(format!("theory {i}: {l} in +Δ but not +∂"));
            }
            if pp && pp_comp && !(pd && pd_comp) {
                problems.push(format!("theory {i}: {l} and its complement both +∂"));
            }
            for (pred, want) in [("definitely", pd), ("not_definitely", md), ("defeasibly", pp), ("not_defeasibly", mp)] {
                let q = Literal::pos(Atom::new(pred, vec![l.to_term()]));
                let got = truth_of(&kb, &q).unwrap() == TruthValue::True;
                if got != want {
                    problems.push(format!("theory {i}: compiled {pred}({l}) = {got}, prover {want}\n{src}"));
                }
            }
            checked += 1;
        }
    }
    // Tweety.
    let p = parse_program(
        "bird(tweety). penguin(tweety). r1: fly(X) := bird(X). r2: neg fly(X) := penguin(X). overrides(r2, r1).",
        "tweety",
    )
    .unwrap();
    let t = DefeasibleTheory::from_modules([&p.module]).unwrap();
    let g = t.ground().unwrap();
    let c = Conclusions::compute(&g);
    let nf = parse_query("neg fly(tweety)").unwrap().remove(0);
    if c.verdict(&g, &nf, ProofTag::PlusPartial) != Verdict::Yes || c.verdict(&g, &nf.complement(), ProofTag::MinusPartial) != Verdict::Yes {
        problems.push("tweety flies".into());
    }
    problems.truncate(3);
    verdict(
        3,
        "defeasible-coherence",
        problems.is_empty(),
        format!("{theories} theories, {checked} literals, {}", problems.join("; ")),
    );
}

fn c4_holds_at_matches_timeline_and_sweep() {
    let mut rng = common::rng(4);
    let mut problems = Vec::new();
    let narratives = 100;
    let mut points = 0usize;
    for i in 0..narratives {
        let n = common::Narrative::random(&mut rng, 50, 5);
        let mut kb = kb_of(&n.source());
        ensure_ec_axioms(&mut kb).unwrap();
        let timeline = simulate_timeline(&kb, 101).unwrap();
        let mut instants: Vec<u64> = vec![0, 101];
        for &(_, s) in &n.happens {
            instants.extend([s.saturating_sub(1), s, s + 1]);
        }
        instants.sort_unstable();
        instants.dedup();
        for f in 0..5 {
            let fluent = Term::symbol(&format!("f{f}"));
            for &t in &instants {
                let query = holds_at(&kb, &fluent, t).unwrap() == TruthValue::True;
                let sim = timeline.holds(&fluent, t);
                let want = n.holds(f, t);
                if (query != want || sim != want) && problems.len() < 3 {
                    problems.push(format!("narrative {i} f{f}@{t}: query {query}, timeline {sim}, sweep {want}"));
                }
                points += 1;
            }
        }
    }
    verdict(
        4,
        "holds-at-vs-timeline",
        problems.is_empty(),
        format!("{narratives} narratives, {points} probes, {}", problems.join("; ")),
    );
}

fn c5_contrary_to_duty_scenario() {
    let contract = load_files(&[fixture("hosting.ctr")]).unwrap();
    let text = std::fs::read_to_string(fixture("events.jsonl")).unwrap();
    let events = parse_events(&text, "events.jsonl").unwrap();

    // Expected violation: the fourth failure inside a 5 s window plus the relative deadline.
    let norm = contract.modules().flat_map(|m| m.norms.iter()).find(|n| &*n.id == "o_avail").unwrap().clone();
    let Some(Deadline::Relative(d)) = norm.deadline else { panic!("o_avail has no relative deadline") };
    let failures: Vec<u64> =
        events.iter().filter(|e| e.event.to_string() == "ping_failed(server1)").map(|e| e.t).collect();
    let fourth = failures.windows(4).find(|w| w[3] - w[0] <= 5000).map(|w| w[3]).unwrap();
    let expected = fourth + d;

    let a = run_monitor(&contract, &events, 10_000, EngineConfig::default()).unwrap();
    let b = run_monitor(&contract, &events, 10_000, EngineConfig::default()).unwrap();
    let got: Vec<(String, u64)> = a.report.violations.iter().map(|v| (v.norm.to_string(), v.t)).collect();
    let identical = a.report.to_json() == b.report.to_json();
    let ok = got == vec![("o_avail".to_string(), expected)] && identical;
    verdict(5, "ctd-scenario", ok, format!("violations {got:?}, expected o_avail at {expected}, replay identical {identical}"));
}

const ECA_SRC: &str = "
watched(s1). watched(s2).
eca alarm { every: 100; event: detect(down(S)); condition: watched(S); action: assert(alarm(S, Now)), notify(ops, S) }
eca broken { every: 100; event: detect(down(S)); condition: true; action: assert(half(S)), notify(ops, half), remove_module(missing) }
eca count { every: 200; event: alarm(S, T); condition: true; action: assert(seen(S)) }
";

fn eca_run(src: &str) -> (String, String, Vec<String>) {
    let p = parse_program(src, "eca").unwrap();
    let mut kb = KnowledgeBase::with_standard_library();
    kb.add_module(p.module).unwrap();
    ensure_ec_axioms(&mut kb).unwrap();
    let mut e = EcaEngine::new(kb, p.eca);
    let stream: Vec<(u64, Term)> = [(50, "s1"), (150, "s2"), (150, "s3"), (420, "s1")]
        .into_iter()
        .map(|(t, s)| (t, Term::app("down", vec![Term::symbol(s)])))
        .collect();
    e.run(&stream, 600).unwrap();
    let log = serde_json::to_string(e.log()).unwrap();
    let notes: Vec<String> = e.notifications().iter().map(|n| n.to_json_line()).collect();
    let mut facts: Vec<String> = e.kb().facts().map(|f| f.to_string()).collect();
    facts.sort();
    (log, notes.join("\n"), facts)
}

fn c6_eca_determinism_and_atomicity() {
    let first = eca_run(ECA_SRC);
    let again = eca_run(ECA_SRC);
    // Declaration order must not matter either.
    let mut lines: Vec<&str> = ECA_SRC.lines().collect();
    lines.reverse();
    let reversed = eca_run(&lines.join("\n"));
    let deterministic = first == again && first == reversed;
    let (log, notes, facts) = &first;
    let rolled_back = !facts.iter().any(|f| f.starts_with("half(")) && !notes.contains("half");
    let errors = log.matches("\"outcome\":\"error\"").count();
    let others_committed = facts.iter().any(|f| f.starts_with("alarm(s1")) && facts.iter().any(|f| f == "seen(s1)");
    verdict(
        6,
        "eca-determinism-atomicity",
        deterministic && rolled_back && errors > 0 && others_committed,
        format!("deterministic {deterministic}, rolled back {rolled_back}, {errors} failing ticks, others committed {others_committed}"),
    );
}

fn c7_serialization_roundtrips_and_fuzzing() {
    let mut rng = common::rng(7);
    let mut problems = Vec::new();
    let programs = 1000;
    for i in 0..programs {
        let p = common::random_program(&mut rng, i);
        let xml = emit_rbsla(&p);
        match parse_rbsla(&xml, "roundtrip.rbsla") {
            Ok(q) if q == p => {}
            Ok(q) => problems.push(format!("xml {i}: {q:?} != {p:?}\n{xml}")),
            Err(e) => problems.push(format!("xml {i}: {e}\n{xml}")),
        }
        let text = print_program(&p);
        match parse_program(&text, &format!("m{i}")) {
            Ok(q) if q == p => {}
            Ok(q) => problems.push(format!("text {i}: {q:?} != {p:?}\n{text}")),
            Err(e) => problems.push(format!("text {i}: {e}\n{text}")),
        }
    }
    // Arbitrary bytes and mangled programs: errors are fine, panics are not.
    let mut panics = 0;
    let fuzz = 3000;
    for i in 0..fuzz {
        let input = if i % 2 == 0 {
            let bytes: Vec<u8> = (0..rng.gen_range(0..200)).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            let mut s = print_program(&common::random_program(&mut rng, i)).into_bytes();
            for _ in 0..rng.gen_range(1..5) {
                if !s.is_empty() {
                    let at = rng.gen_range(0..s.len());
                    s[at] = b"(){}[].,:-\"'% \nX0"[rng.gen_range(0..17)];
                }
            }
            s.truncate(rng.gen_range(0..=s.len()));
            String::from_utf8_lossy(&s).into_owned()
        };
        let text = input.clone();
        if catch_unwind(AssertUnwindSafe(|| {
            let _ = parse_program(&text, "fuzz");
            let _ = parse_rbsla(&text, "fuzz.rbsla");
        }))
        .is_err()
        {
            panics += 1;
        }
    }
    let failures = problems.len();
    problems.truncate(2);
    verdict(
        7,
        "roundtrip-and-fuzz",
        failures == 0 && panics == 0,
        format!("{programs} programs, {failures} roundtrip failures, {fuzz} fuzz inputs, {panics} panics {}", problems.join("; ")),
    );
}

fn c8_performance() {
    let chain = run_bench(Profile::Chain, 5000, 1);
    let tc = run_bench(Profile::Tc, 200, 1);
    let contract = load_files(&[fixture("hosting.ctr")]).unwrap();
    let events = parse_events(&std::fs::read_to_string(fixture("events.jsonl")).unwrap(), "events.jsonl").unwrap();
    let run = run_monitor(&contract, &events, 10_000, EngineConfig::default()).unwrap();
    let mean = run.latency.map(|l| l.mean_ms).unwrap_or(f64::INFINITY);
    let chain_s = chain.mean_ms / 1000.0;
    let tc_s = tc.mean_ms / 1000.0;
    let ok = chain.error.is_none()
        && tc.error.is_none()
        && chain.truth == Some(TruthValue::True)
        && tc.answers == 199 * 200 / 2
        && chain_s < CHAIN_LIMIT_S
        && tc_s < TC_LIMIT_S
        && mean < SLA_EVENT_LIMIT_MS;
    verdict(
        8,
        "performance",
        ok,
        format!(
            "chain 5000 {chain_s:.2} s (< {CHAIN_LIMIT_S}), tc 200 {tc_s:.2} s (< {TC_LIMIT_S}), sla mean {mean:.2} ms/event (< {SLA_EVENT_LIMIT_MS})"
        ),
    );
}

fn c9_consistency_check() {
    let printed = |src: &str| check_consistency(&kb_of(src)).unwrap().iter().map(|a| a.to_string()).collect::<Vec<_>>();
    let bad = printed("p. neg p. q :- p.");
    let bad_ok = bad == ["p"];
    let derived = printed("a. b :- a. neg b :- a.");
    let derived_ok = derived == ["b"];
    let mut rng = common::rng(9);
    let mut clean = 0;
    let generated = 200;
    for _ in 0..generated {
        // Positive-only heads cannot conflict.
        let g = common::GroundProgram::random(&mut rng, 12, 24);
        if check_consistency(&kb_of(&g.source())).unwrap().is_empty() {
            clean += 1;
        }
    }
    verdict(
        9,
        "consistency",
        bad_ok && derived_ok && clean == generated,
        format!("{{p. neg p.}} -> {bad:?}, derived conflict -> {derived:?}, {clean}/{generated} consistent programs clean"),
    );
}
