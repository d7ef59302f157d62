//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one PASS/FAIL line. Run with `cargo test --test acceptance`.

mod common;

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use sdr_core::alliance::{
    is_1_minimal, is_fg_alliance, is_minimal, members, FgParams, FgaMutation, Fga, Preset,
};
use sdr_core::analysis::{
    alliance_predicates, analyze, analyze_alliance, AnalysisOptions, Check, TraceReport,
};
use sdr_core::engine::{enabled, run, run_until, Daemon, DaemonKind, Limits};
use sdr_core::explorer::{composed_space, describe, distance, explore, Goal, DEFAULT_BUDGET};
use sdr_core::graph::{Graph, GraphKind};
use sdr_core::sdr::{ComposedState, Requirement, Sdr, SdrMutation, Standalone};
use sdr_core::unison::{Clock, Unison, UnisonMutation};

const SEEDS: u64 = 1000;
const MAX_N: usize = 8;
const POST_NORMAL_STEPS: usize = 1000;
const KEEP: usize = 5;

/// Outcome of one criterion: failures (first few kept) and report notes.
struct Criterion {
    id: &'static str,
    title: &'static str,
    checks: u64,
    failures: u64,
    examples: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: &'static str, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            checks: 0,
            failures: 0,
            examples: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < KEEP {
                self.examples.push(what());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    fn report(&self) {
        let mut out = std::io::stdout().lock();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "criterion {:>4} {verdict}: {} [{} checks, {} failed]",
            self.id, self.title, self.checks, self.failures
        )
        .unwrap();
        for n in &self.notes {
            writeln!(out, "    {n}").unwrap();
        }
        for e in &self.examples {
            writeln!(out, "    failure: {e}").unwrap();
        }
    }
}

/// Largest observed value/bound ratio.
#[derive(Default)]
struct Ratio {
    worst: f64,
    at: String,
}

impl Ratio {
    fn observe(&mut self, value: f64, bound: f64, at: impl FnOnce() -> String) {
        let r = value / bound;
        if r > self.worst {
            self.worst = r;
            self.at = at();
        }
    }

    fn note(&self, what: &str) -> String {
        format!("max {what} / bound = {:.3} ({})", self.worst, self.at)
    }
}

struct Instance {
    graph: Graph,
    daemon: DaemonKind,
    seed: u64,
}

impl Instance {
    fn tag(&self) -> String {
        format!(
            "n={} m={} D={} daemon={} seed={}",
            self.graph.n(),
            self.graph.m(),
            self.graph.diameter(),
            self.daemon,
            self.seed
        )
    }
}

/// 5 kinds × 4 daemons × `SEEDS` seeds, with n cycling through the
/// kind's legal sizes up to `MAX_N`.
fn sweep() -> impl Iterator<Item = Instance> {
    GraphKind::ALL.into_iter().flat_map(|kind| {
        DaemonKind::ALL.into_iter().flat_map(move |daemon| {
            (0..SEEDS).map(move |seed| {
                let sizes = MAX_N + 1 - kind.min_size();
                let n = kind.min_size() + (seed as usize % sizes);
                Instance {
                    graph: Graph::generate(kind, n, seed).unwrap(),
                    daemon,
                    seed,
                }
            })
        })
    })
}

fn shuffled_ids(n: usize, seed: u64) -> Vec<u64> {
    let mut ids: Vec<u64> = (0..n as u64).map(|i| 7 * i + 1).collect();
    ids.shuffle(&mut common::rng(seed ^ 0x1d));
    ids
}

/// Checks shared by every monitored reset-layer run.
struct ResetChecks {
    rounds: Criterion,
    sdr_moves: Criterion,
    ladder: Criterion,
    ladder_tight: Criterion,
    monitors: Criterion,
    round_ratio: Ratio,
    move_ratio: Ratio,
    ladder_p2_max: usize,
}

impl ResetChecks {
    fn new() -> Self {
        ResetChecks {
            rounds: Criterion::new("1", "rounds to normal <= 3n (unison and alliance, all kinds and daemons)"),
            sdr_moves: Criterion::new("2", "SDR moves per process <= 3n+3"),
            ladder: Criterion::new("11", "ladder: P1 <= 1 round, then P2 <= n, P3 <= n, P4 <= n further rounds"),
            ladder_tight: Criterion::new("11b", "ladder, tight P2 step: P2 <= n-1 further rounds"),
            monitors: Criterion::new("9", "closure monitor catalog: zero violations on every sweep, each monitor caught by a mutant"),
            round_ratio: Ratio::default(),
            move_ratio: Ratio::default(),
            ladder_p2_max: 0,
        }
    }

    fn observe(&mut self, spec: &str, inst: &Instance, rep: &TraceReport) {
        let n = inst.graph.n();
        let tag = || format!("{spec} {}", inst.tag());
        match rep.rounds_to_normal {
            Some(r) => {
                self.rounds.check(r <= 3 * n, || format!("{} rounds {r} > {}", tag(), 3 * n));
                self.round_ratio.observe(r as f64, (3 * n) as f64, tag);
            }
            None => self.rounds.check(false, || format!("{} never normal", tag())),
        }
        let worst = rep.sdr_moves_per_process.iter().copied().max().unwrap_or(0);
        let bound = 3 * n as u64 + 3;
        self.sdr_moves.check(worst <= bound, || format!("{} sdr moves {worst} > {bound}", tag()));
        self.move_ratio.observe(worst as f64, bound as f64, tag);

        let [p1, p2, p3, p4] = rep.ladder_rounds;
        let all = [p1, p2, p3, p4];
        let limits = [1, n, n, n];
        let ok = all.iter().zip(limits).all(|(r, l)| r.is_some_and(|r| r <= l));
        self.ladder.check(ok, || format!("{} ladder {all:?} vs {limits:?}", tag()));
        let ok = p2.is_some_and(|r| r < n);
        self.ladder_tight.check(ok, || format!("{} P2 took {p2:?} rounds, n-1 = {}", tag(), n - 1));
        self.ladder_p2_max = self.ladder_p2_max.max(p2.unwrap_or(0));

        self.monitors.check(rep.violations.is_empty(), || {
            format!("{} violations {:?}", tag(), &rep.violations[..rep.violations.len().min(3)])
        });
    }
}

fn unison_sweep(reset: &mut ResetChecks, c3: &mut Criterion, c4: &mut Criterion) {
    let mut ratio = Ratio::default();
    let mut worst_moves = 0u64;
    for inst in sweep() {
        let g = &inst.graph;
        let n = g.n() as u64;
        let alg = Sdr::new(Unison::for_graph(g));
        let u = alg.inner();
        let init = u.random_config(g, &mut common::rng(inst.seed));
        let mut normal_at: Option<usize> = None;
        let t = run_until(
            &alg,
            g,
            init,
            &mut Daemon::new(inst.daemon, inst.seed),
            Limits::default(),
            |t| {
                if normal_at.is_none() && u.legitimate(g, t.current()) {
                    normal_at = Some(t.steps.len());
                }
                normal_at.is_some_and(|s| t.steps.len() >= s + POST_NORMAL_STEPS)
            },
        )
        .unwrap();
        let rep = analyze(&alg, g, &t, &[], AnalysisOptions::all());
        reset.observe("unison", &inst, &rep);

        let d = g.diameter() as u64;
        let bound = (3 * d + 3) * n * n + (3 * d + 1) * (n - 1) + 1;
        let moves = rep.moves_to_normal.unwrap_or(u64::MAX);
        c3.check(moves <= bound, || format!("{} moves {moves} > {bound}", inst.tag()));
        ratio.observe(moves as f64, bound as f64, || inst.tag());
        worst_moves = worst_moves.max(moves);

        let Some(start) = rep.first_normal else {
            c4.check(false, || format!("{} never normal", inst.tag()));
            continue;
        };
        let after = &t.configs[start..];
        c4.check(after.len() > POST_NORMAL_STEPS, || format!("{} only {} steps after normal", inst.tag(), after.len() - 1));
        let ok = after.iter().all(|c| {
            u.safe(g, c) && u.legitimate(g, c) && enabled(&alg, g, c).iter().any(|m| !m.is_empty())
        });
        c4.check(ok, || format!("{} unsafe or deadlocked after normal", inst.tag()));
    }
    c3.note(ratio.note("moves to normal"));
    c3.note(format!("max moves to normal observed: {worst_moves}"));
}

fn alliance_sweep(reset: &mut ResetChecks, c7: &mut Criterion) {
    let mut rounds = Ratio::default();
    let mut moves = Ratio::default();
    for inst in sweep() {
        let g = &inst.graph;
        let p = FgParams::new(g, vec![1; g.n()], vec![0; g.n()], shuffled_ids(g.n(), inst.seed)).unwrap();
        let fga = Fga::new(p.clone());
        let alg = Sdr::new(fga.clone());
        let init = fga.random_config(g, &mut common::rng(inst.seed));
        let t = run(&alg, g, init, &mut Daemon::new(inst.daemon, inst.seed), Limits::default()).unwrap();
        let rep = analyze(&alg, g, &t, &alliance_predicates(&fga), AnalysisOptions::all());
        reset.observe("alliance", &inst, &rep);
        let al = analyze_alliance(&alg, &fga, g, &t);
        reset.monitors.check(al.is_clean(), || format!("alliance {} {al:?}", inst.tag()));
        composed_alliance_checks(c7, &inst, &p, &t, &rep, &mut rounds, &mut moves);
    }
    c7.note(rounds.note("rounds to terminal"));
    c7.note(moves.note("total moves"));
}

fn composed_alliance_checks(
    c: &mut Criterion,
    inst: &Instance,
    p: &FgParams,
    t: &sdr_core::engine::Trace<ComposedState<sdr_core::alliance::AllianceState>>,
    rep: &TraceReport,
    rounds: &mut Ratio,
    moves: &mut Ratio,
) {
    let g = &inst.graph;
    let (n, m, delta) = (g.n() as u64, g.m() as u64, g.delta_max() as u64);
    c.check(t.terminal, || format!("{} not terminal", inst.tag()));
    let r = rep.rounds_to_terminal.unwrap_or(usize::MAX) as u64;
    c.check(r <= 8 * n + 4, || format!("{} rounds {r} > {}", inst.tag(), 8 * n + 4));
    rounds.observe(r as f64, (8 * n + 4) as f64, || inst.tag());
    let bound = (n + 1) * (16 * m * delta + 36 * m + 27 * n);
    c.check(rep.total_moves <= bound, || format!("{} moves {} > {bound}", inst.tag(), rep.total_moves));
    moves.observe(rep.total_moves as f64, bound as f64, || inst.tag());
    let a = members(t.current());
    c.check(is_fg_alliance(&a, g, p), || format!("{} terminal set {a:?} not an alliance", inst.tag()));
    let one = is_1_minimal(&a, g, p);
    c.check(one == Ok(true), || format!("{} terminal set {a:?} not 1-minimal (f={:?} g={:?})", inst.tag(), p.f, p.g));
}

fn standalone_fga(c6: &mut Criterion, monitors: &mut Criterion) {
    let (mut rounds, mut per, mut total) = (Ratio::default(), Ratio::default(), Ratio::default());
    for inst in sweep() {
        let g = &inst.graph;
        let (n, m, delta) = (g.n() as u64, g.m() as u64, g.delta_max() as u64);
        let p = FgParams::new(g, vec![1; g.n()], vec![0; g.n()], shuffled_ids(g.n(), inst.seed)).unwrap();
        let fga = Fga::new(p);
        let alg = Standalone(fga.clone());
        let t = run(&alg, g, fga.gamma_init(g), &mut Daemon::new(inst.daemon, inst.seed), Limits::default()).unwrap();
        c6.check(t.terminal, || format!("{} not terminal", inst.tag()));
        let r = t.rounds() as u64;
        c6.check(r <= 5 * n + 4, || format!("{} rounds {r} > {}", inst.tag(), 5 * n + 4));
        rounds.observe(r as f64, (5 * n + 4) as f64, || inst.tag());
        for u in 0..g.n() {
            let du = g.degree(u) as u64;
            let bound = 8 * du * delta + 18 * du + 24;
            let got = t.moves_per_process[u];
            c6.check(got <= bound, || format!("{} process {u} moved {got} > {bound}", inst.tag()));
            per.observe(got as f64, bound as f64, || inst.tag());
        }
        let bound = 16 * delta * m + 36 * m + 24 * n;
        c6.check(t.total_moves() <= bound, || format!("{} total {} > {bound}", inst.tag(), t.total_moves()));
        total.observe(t.total_moves() as f64, bound as f64, || inst.tag());
        let al = analyze_alliance(&alg, &fga, g, &t);
        monitors.check(al.is_clean(), || format!("standalone {} {al:?}", inst.tag()));
    }
    c6.note(rounds.note("rounds"));
    c6.note(per.note("per-process moves"));
    c6.note(total.note("total moves"));
}

fn unison_liveness(c5: &mut Criterion) {
    for seed in 0..10 {
        for g in common::family(MAX_N, seed) {
            let alg = Sdr::new(Unison::for_graph(&g));
            let init = alg.inner().gamma_init(&g);
            let t = run(&alg, &g, init.clone(), &mut Daemon::new(DaemonKind::SubsetRandom(0.5), seed), Limits { max_steps: 10_000, max_rounds: usize::MAX }).unwrap();
            let ok = t.steps.len() == 10_000 && t.moves_per_process.iter().all(|&k| k >= 1);
            c5.check(ok, || format!("subset n={} seed={seed}: moves {:?}", g.n(), t.moves_per_process));

            let t = run(&alg, &g, init, &mut Daemon::new(DaemonKind::Synchronous, seed), Limits { max_steps: 500, max_rounds: usize::MAX }).unwrap();
            let every_round = t.rounds() == t.steps.len()
                && t.steps.iter().all(|s| s.activated.len() == g.n())
                && t.transitions().all(|(pre, _, post)| {
                    pre.iter().zip(post).all(|(a, b)| b.inner.0 == (a.inner.0 + 1) % alg.inner().k())
                });
            c5.check(every_round, || format!("synchronous n={} seed={seed}", g.n()));
        }
    }
    c5.note("synchronous half exact; subset_random half is a regression check, not a proof");
}

fn presets(c8: &mut Criterion) {
    let presets = [
        ("dominating_set", Preset::DominatingSet),
        ("2_domination", Preset::KDomination(2)),
        ("2_tuple_domination", Preset::KTupleDomination(2)),
        ("global_powerful", Preset::GlobalPowerful),
    ];
    let mut minimal_checked = 0;
    for (name, preset) in presets {
        let mut sub = Criterion::new("8", name);
        let (mut rounds, mut moves) = (Ratio::default(), Ratio::default());
        let mut skipped = 0;
        let mut runs = 0;
        for kind in GraphKind::ALL {
            for n in kind.min_size()..=6 {
                for daemon in DaemonKind::ALL {
                    for seed in 0..50 {
                        let graph = Graph::generate(kind, n, seed).unwrap();
                        let (f, gg) = preset.values(&graph);
                        let Ok(p) = FgParams::new(&graph, f, gg, shuffled_ids(n, seed)) else {
                            skipped += 1;
                            continue;
                        };
                        runs += 1;
                        let inst = Instance { graph, daemon, seed };
                        let g = &inst.graph;
                        let fga = Fga::new(p.clone());
                        let alg = Sdr::new(fga.clone());
                        let init = fga.random_config(g, &mut common::rng(seed));
                        let t = run(&alg, g, init, &mut Daemon::new(daemon, seed), Limits::default()).unwrap();
                        let rep = analyze(&alg, g, &t, &alliance_predicates(&fga), AnalysisOptions { branches: false, requirements: true });
                        sub.check(rep.violations.is_empty(), || format!("{} monitors {:?}", inst.tag(), &rep.violations[..rep.violations.len().min(3)]));
                        composed_alliance_checks(&mut sub, &inst, &p, &t, &rep, &mut rounds, &mut moves);
                        // Cross-check: with f >= g, 1-minimal and minimal agree.
                        let a = members(t.current());
                        if p.f.iter().zip(&p.g).all(|(f, g)| f >= g) && is_fg_alliance(&a, g, &p) {
                            minimal_checked += 1;
                            sub.check(is_minimal(&a, g, &p) == is_1_minimal(&a, g, &p), || format!("{} minimality oracles disagree", inst.tag()));
                        }
                    }
                }
            }
        }
        c8.checks += sub.checks;
        c8.failures += sub.failures;
        let verdict = if sub.passed() { "ok" } else { "FAILED" };
        c8.note(format!(
            "{name}: {verdict}, {runs} runs ({skipped} graphs skipped for degree), {} failed checks; {}; {}",
            sub.failures,
            rounds.note("rounds"),
            moves.note("moves")
        ));
        for e in sub.examples.iter().take(2) {
            c8.note(format!("  {name} failure: {e}"));
        }
    }
    c8.note(format!("brute-force minimality cross-checked on {minimal_checked} terminal sets"));
}

fn count(check: Check) -> impl Fn(&TraceReport) -> usize {
    move |r| r.violations.iter().filter(|v| v.check == check).count()
}

/// Mutant sweeps: each catalog monitor must fire at least once.
fn negative_controls(c9: &mut Criterion) {
    let unison_cases: Vec<(&str, Check, SdrMutation, UnisonMutation)> = vec![
        ("not P_Up closed", Check::NotUpClosed, SdrMutation::WeakRuleRf, UnisonMutation::None),
        ("P_Correct or P_RB closed", Check::CorrectOrRbClosed, SdrMutation::WeakRuleRf, UnisonMutation::None),
        ("not P_root and not P_Up closed", Check::NotRootNotUpClosed, SdrMutation::WeakRuleRf, UnisonMutation::None),
        ("not P_R1 closed", Check::NotR1Closed, SdrMutation::WeakRuleRf, UnisonMutation::None),
        ("not P_R2 closed", Check::NotR2Closed, SdrMutation::None, UnisonMutation::IgnoresClean),
        ("alive roots monotone", Check::AliveRootsGrew, SdrMutation::WeakRuleRf, UnisonMutation::None),
        ("segment count <= n+1", Check::SegmentCount, SdrMutation::None, UnisonMutation::IgnoresClean),
        ("segment rule language", Check::SegmentLanguage, SdrMutation::WeakRuleC, UnisonMutation::None),
        ("input never writes reset vars", Check::Requirement(Requirement::InputWritesResetVars), SdrMutation::None, UnisonMutation::WritesDistance),
        ("input disabled while unsafe", Check::Requirement(Requirement::EnabledWhileUnsafe), SdrMutation::None, UnisonMutation::IgnoresClean),
        ("reset reaches reset state", Check::Requirement(Requirement::ResetNotReached), SdrMutation::RbSkipsReset, UnisonMutation::None),
    ];
    let mut lines = Vec::new();
    for (name, check, sm, um) in unison_cases {
        let hits = mutant_hits(count(check), |g| {
            Sdr::with_mutation(Unison::for_graph(g).with_mutation(um), sm)
        });
        c9.check(hits > 0, || format!("mutant {sm:?}/{um:?} not caught by '{name}'"));
        lines.push(format!("{name}: {hits} ({sm:?}/{um:?})"));
    }
    // Alliance local closure under a rule_Q that keeps its pointer.
    let mut hits = 0;
    for g in common::family(6, 0) {
        let fga = Fga::new(FgParams::preset(&g, Preset::DominatingSet).unwrap()).with_mutation(FgaMutation::QKeepsPtr);
        let alg = Sdr::new(fga.clone());
        for daemon in DaemonKind::ALL {
            for seed in 0..10 {
                let init = fga.random_config(&g, &mut common::rng(seed));
                let t = run(&alg, &g, init, &mut Daemon::new(daemon, seed), Limits { max_steps: 3000, max_rounds: usize::MAX }).unwrap();
                let rep = analyze(&alg, &g, &t, &alliance_predicates(&fga), AnalysisOptions::all());
                hits += count(Check::Local("scr_surplus_or_no_ptr"))(&rep);
            }
        }
    }
    c9.check(hits > 0, || "rule_Q keeping its pointer not caught by 'scr = 1 or ptr = none'".into());
    lines.push(format!("scr = 1 or ptr = none: {hits} (QKeepsPtr)"));
    c9.note(format!("negative controls (violations found): {}", lines.join("; ")));
}

fn mutant_hits<I>(monitor: impl Fn(&TraceReport) -> usize, build: impl Fn(&Graph) -> Sdr<I>) -> usize
where
    I: sdr_core::sdr::InputAlgorithm,
{
    let mut hits = 0;
    for g in common::family(6, 0) {
        let alg = build(&g);
        for daemon in DaemonKind::ALL {
            for seed in 0..10 {
                let mut rng = common::rng(seed);
                let init: Vec<_> = (0..g.n())
                    .map(|u| {
                        use rand::Rng;
                        let inner = alg.inner().local_domain(&g, u);
                        ComposedState {
                            sdr: sdr_core::sdr::random_sdr_state(&mut rng, g.n() as u64),
                            inner: inner[rng.random_range(0..inner.len())].clone(),
                        }
                    })
                    .collect();
                let t = run(&alg, &g, init, &mut Daemon::new(daemon, seed), Limits { max_steps: 300, max_rounds: usize::MAX }).unwrap();
                hits += monitor(&analyze(&alg, &g, &t, &[], AnalysisOptions::all()));
            }
        }
    }
    hits
}

fn exhaustive(c10: &mut Criterion) {
    let unison = |c: &mut Criterion, kind: GraphKind, n: usize, k: u32| {
        let g = Graph::generate(kind, n, 0).unwrap();
        let u = Unison::new(k, n).unwrap();
        let alg = Sdr::new(u.clone());
        let start = Instant::now();
        let space = composed_space(&alg, &u, &g, n as u64, true).unwrap();
        let goal = Goal::Convergence {
            target: Box::new(|cfg: &[ComposedState<Clock>]| u.legitimate(&g, cfg)),
        };
        match explore(&space, &goal, DEFAULT_BUDGET, &distance) {
            Ok(r) => {
                c.check(r.certified, || format!("unison {kind} n={n}: {:?}", r.counterexample));
                c.check(r.max_measure <= 2 * n as u64, || format!("unison {kind} n={n}: d reached {}", r.max_measure));
                c.note(format!("unison {kind} n={n} K={k}: {} in {:.2?}", describe(&r), start.elapsed()));
            }
            Err(e) => c.check(false, || format!("unison {kind} n={n}: {e}")),
        }
    };
    unison(c10, GraphKind::Path, 2, 3);
    unison(c10, GraphKind::Path, 3, 4);
    unison(c10, GraphKind::Ring, 3, 4);

    for n in [2, 3] {
        let g = Graph::generate(GraphKind::Path, n, 0).unwrap();
        let p = FgParams::preset(&g, Preset::DominatingSet).unwrap();
        let fga = Fga::new(p.clone());
        let alg = Sdr::new(fga.clone());
        let start = Instant::now();
        let space = composed_space(&alg, &fga, &g, n as u64, true).unwrap();
        let goal = Goal::Silence {
            terminal_ok: Box::new(|cfg: &[ComposedState<_>]| is_1_minimal(&members(cfg), &g, &p) == Ok(true)),
        };
        // Alliance on P3 reaches ~4.5e7 configurations; the budget is raised
        // to the index space.
        let budget = space.size().max(DEFAULT_BUDGET);
        match explore(&space, &goal, budget, &distance) {
            Ok(r) => {
                c10.check(r.certified, || format!("alliance P{n}: {:?}", r.counterexample));
                c10.check(r.max_measure <= 2 * n as u64, || format!("alliance P{n}: d reached {}", r.max_measure));
                c10.note(format!("alliance P{n} f=1 g=0: {} in {:.2?} (budget {budget})", describe(&r), start.elapsed()));
            }
            Err(e) => c10.check(false, || format!("alliance P{n}: {e}")),
        }
    }
}

#[test]
fn acceptance() {
    let started = Instant::now();
    let mut reset = ResetChecks::new();
    let mut c3 = Criterion::new("3", "unison moves to normal <= (3D+3)n^2 + (3D+1)(n-1) + 1");
    let mut c4 = Criterion::new("4", "unison safety and no deadlock for 1000 steps after normality");
    let mut c5 = Criterion::new("5", "unison liveness from gamma_init (subset_random 1e4 steps; synchronous every round)");
    let mut c6 = Criterion::new("6", "FGA standalone from gamma_init: rounds <= 5n+4, per-process and total move bounds");
    let mut c7 = Criterion::new("7", "FGA with SDR from sampled configs: silent, rounds <= 8n+4, move bound, alliance and 1-minimality oracles");
    let mut c8 = Criterion::new("8", "alliance presets on n <= 6: criterion 7 holds for each");
    let mut c10 = Criterion::new("10", "exhaustive certification: unison P2/P3/C3, alliance P2/P3");

    unison_sweep(&mut reset, &mut c3, &mut c4);
    alliance_sweep(&mut reset, &mut c7);
    standalone_fga(&mut c6, &mut reset.monitors);
    unison_liveness(&mut c5);
    presets(&mut c8);
    negative_controls(&mut reset.monitors);
    exhaustive(&mut c10);

    reset.rounds.note(reset.round_ratio.note("rounds to normal"));
    reset.sdr_moves.note(reset.move_ratio.note("SDR moves of one process"));
    reset.ladder.note(format!("largest P1->P2 segment observed: {} rounds", reset.ladder_p2_max));
    let all = [
        &reset.rounds,
        &reset.sdr_moves,
        &c3,
        &c4,
        &c5,
        &c6,
        &c7,
        &c8,
        &reset.monitors,
        &c10,
        &reset.ladder,
        &reset.ladder_tight,
    ];
    for c in all {
        c.report();
    }
    writeln!(std::io::stdout(), "acceptance suite finished in {:.1?}", started.elapsed()).unwrap();
    let failed: Vec<&str> = all.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
