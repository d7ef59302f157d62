//! One seeded run: initial configuration, execution, measurements, monitors.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sdr_core::alliance::{self, is_1_minimal, is_fg_alliance, AllianceState, FgParams, Fga};
use sdr_core::analysis::{
    alliance_predicates, analyze, analyze_alliance, AllianceReport, AnalysisOptions, LocalPredicate,
    TraceReport, Violation,
};
use sdr_core::engine::{run_until, Algorithm, Daemon, EngineError, StopReason, Trace, View};
use sdr_core::graph::Graph;
use sdr_core::sdr::{is_normal, is_sdr_rule, ComposedState, InputAlgorithm, Sdr, SdrState, Standalone};
use sdr_core::unison::{Clock, Unison};

use crate::config::{
    load_init, AlgorithmKind, ConfigError, InitMode, Prepared, Program, RunConfig, DEFAULT_AFTER_NORMAL,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("output: {0}")]
    Io(String),
}

pub const ROUNDS_3N: &str = "rounds_to_normal_3n";
pub const SDR_MOVES: &str = "sdr_moves_per_process_3n_plus_3";
pub const UNISON_MOVES: &str = "moves_to_normal";
pub const ROUNDS_8N4: &str = "rounds_to_terminal_8n_plus_4";
pub const COMPOSED_MOVES: &str = "total_moves_composed";
pub const ROUNDS_5N4: &str = "rounds_to_terminal_5n_plus_4";
pub const FGA_PROCESS_MOVES: &str = "moves_per_process_fga";
pub const FGA_TOTAL_MOVES: &str = "total_moves_fga";
pub const BARE_MOVES_3D: &str = "moves_per_process_3d";

/// Bounds checked for a run, in report and CSV order.
pub fn bound_names(alg: AlgorithmKind, init: InitMode) -> Vec<&'static str> {
    let from_gamma = init == InitMode::GammaInit;
    match alg {
        AlgorithmKind::UnisonSdr => vec![ROUNDS_3N, SDR_MOVES, UNISON_MOVES],
        AlgorithmKind::AllianceSdr if from_gamma => {
            vec![ROUNDS_3N, SDR_MOVES, ROUNDS_8N4, COMPOSED_MOVES, ROUNDS_5N4]
        }
        AlgorithmKind::AllianceSdr => vec![ROUNDS_3N, SDR_MOVES, ROUNDS_8N4, COMPOSED_MOVES],
        AlgorithmKind::Alliance if from_gamma => vec![ROUNDS_5N4, FGA_PROCESS_MOVES, FGA_TOTAL_MOVES],
        AlgorithmKind::Alliance => vec![],
        AlgorithmKind::Unison if from_gamma => vec![],
        AlgorithmKind::Unison => vec![BARE_MOVES_3D],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound: u64,
    /// `None` when the measured event was not reached within the limits.
    pub observed: Option<u64>,
    /// Process attaining the smallest margin, for per-process bounds.
    pub process: Option<usize>,
}

impl BoundCheck {
    pub fn ok(&self) -> bool {
        self.observed.is_some_and(|o| o <= self.bound)
    }

    pub fn margin(&self) -> Option<i64> {
        self.observed.map(|o| self.bound as i64 - o as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphInfo {
    pub n: usize,
    pub m: usize,
    pub diameter: usize,
    pub delta_max: usize,
    pub digest: String,
}

impl GraphInfo {
    pub fn of(g: &Graph) -> Self {
        GraphInfo {
            n: g.n(),
            m: g.m(),
            diameter: g.diameter(),
            delta_max: g.delta_max(),
            digest: g.digest(),
        }
    }
}

/// Brute-force verdict on the terminal member set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub members: Vec<bool>,
    pub alliance: bool,
    pub one_minimal: bool,
    /// Whether the algorithm guarantees both verdicts for this run.
    pub guaranteed: bool,
}

/// Monitor violations grouped by check, with the first few in full.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MonitorSummary {
    pub counts: BTreeMap<String, usize>,
    pub examples: Vec<Violation>,
}

const MAX_EXAMPLES: usize = 20;

impl MonitorSummary {
    fn add(&mut self, v: Violation) {
        *self.counts.entry(format!("{:?}", v.check)).or_default() += 1;
        if self.examples.len() < MAX_EXAMPLES {
            self.examples.push(v);
        }
    }

    fn add_named(&mut self, name: &str, count: usize) {
        if count > 0 {
            *self.counts.entry(name.to_owned()).or_default() += count;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub algorithm: AlgorithmKind,
    pub graph: GraphInfo,
    pub daemon: String,
    pub seed: u64,
    pub init: InitMode,
    pub k: Option<u32>,
    pub params: Option<FgParams>,
    pub mutation: Option<String>,
    pub stop: StopReason,
    pub terminal: bool,
    pub steps: usize,
    pub rounds: usize,
    pub total_moves: u64,
    pub moves_per_process: Vec<u64>,
    pub first_normal: Option<usize>,
    pub rounds_to_normal: Option<usize>,
    pub moves_to_normal: Option<u64>,
    pub rounds_to_terminal: Option<usize>,
    pub bounds: Vec<BoundCheck>,
    pub oracle: Option<OracleReport>,
    /// Present only when monitors are on.
    pub monitors: Option<MonitorSummary>,
    pub analysis: Option<TraceReport>,
    pub alliance: Option<AllianceReport>,
    /// Everything that went wrong, one line each.
    pub problems: Vec<String>,
}

impl Report {
    pub fn bounds_ok(&self) -> bool {
        self.bounds.iter().all(BoundCheck::ok)
    }

    pub fn violation_count(&self) -> usize {
        self.monitors.as_ref().map_or(0, MonitorSummary::total)
    }

    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self
            .bounds
            .iter()
            .filter(|b| !b.ok())
            .map(|b| b.name)
            .collect();
        let bounds = if failed.is_empty() {
            "ok".to_owned()
        } else {
            format!("FAIL({})", failed.join(","))
        };
        let opt = |v: Option<usize>| v.map_or("-".to_owned(), |x| x.to_string());
        let mut line = format!(
            "{} n={} m={} daemon={} seed={} terminal={} steps={} rounds={} moves={} rounds_to_normal={} bounds={}",
            serde_json::to_value(self.algorithm)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            self.graph.n,
            self.graph.m,
            self.daemon,
            self.seed,
            self.terminal,
            self.steps,
            self.rounds,
            self.total_moves,
            opt(self.rounds_to_normal),
            bounds,
        );
        if let Some(o) = &self.oracle {
            line += &format!(" alliance={} one_minimal={}", o.alliance, o.one_minimal);
        }
        match &self.monitors {
            Some(m) => line += &format!(" violations={}", m.total()),
            None => line += " monitors=off",
        }
        line
    }
}

/// A finished run with its artifacts.
pub struct Outcome {
    pub report: Report,
    /// JSON-lines trace, empty unless requested.
    pub trace_jsonl: Vec<u8>,
    /// The initial configuration as a JSON array, replayable with `init = "file"`.
    pub init_json: String,
}

/// Input algorithms the runner knows how to initialize and monitor.
trait Workload: InputAlgorithm + Clone
where
    Self::State: Serialize + for<'de> Deserialize<'de>,
{
    /// Unison never terminates; its runs stop a fixed number of steps after
    /// first reaching legitimacy.
    const PERPETUAL: bool;

    fn gamma_init(&self, graph: &Graph) -> Vec<ComposedState<Self::State>>;

    fn random_config(&self, graph: &Graph, rng: &mut ChaCha8Rng) -> Vec<ComposedState<Self::State>>;

    fn extra_predicates(&self) -> Vec<LocalPredicate<'_, Self::State>>;

    fn params(&self) -> Option<FgParams>;

    /// Algorithm-specific trace monitors.
    fn trace_checks<A>(&self, alg: &A, graph: &Graph, trace: &Trace<A::State>, m: &mut MonitorSummary) -> Option<AllianceReport>
    where
        A: Algorithm<State = ComposedState<Self::State>>;

    /// Brute-force verdicts on a terminal configuration: (members, alliance, 1-minimal).
    fn oracle(&self, graph: &Graph, config: &[ComposedState<Self::State>]) -> Option<(Vec<bool>, bool, bool)>;
}

impl Workload for Unison {
    const PERPETUAL: bool = true;

    fn gamma_init(&self, graph: &Graph) -> Vec<ComposedState<Clock>> {
        Unison::gamma_init(self, graph)
    }

    fn random_config(&self, graph: &Graph, rng: &mut ChaCha8Rng) -> Vec<ComposedState<Clock>> {
        Unison::random_config(self, graph, rng)
    }

    fn extra_predicates(&self) -> Vec<LocalPredicate<'_, Clock>> {
        Vec::new()
    }

    fn params(&self) -> Option<FgParams> {
        None
    }

    fn trace_checks<A>(&self, _: &A, _: &Graph, _: &Trace<A::State>, _: &mut MonitorSummary) -> Option<AllianceReport>
    where
        A: Algorithm<State = ComposedState<Clock>>,
    {
        None
    }

    fn oracle(&self, _: &Graph, _: &[ComposedState<Clock>]) -> Option<(Vec<bool>, bool, bool)> {
        None
    }
}

impl Workload for Fga {
    const PERPETUAL: bool = false;

    fn gamma_init(&self, graph: &Graph) -> Vec<ComposedState<AllianceState>> {
        Fga::gamma_init(self, graph)
    }

    fn random_config(&self, graph: &Graph, rng: &mut ChaCha8Rng) -> Vec<ComposedState<AllianceState>> {
        Fga::random_config(self, graph, rng)
    }

    fn extra_predicates(&self) -> Vec<LocalPredicate<'_, AllianceState>> {
        alliance_predicates(self)
    }

    fn params(&self) -> Option<FgParams> {
        Some(Fga::params(self).clone())
    }

    fn trace_checks<A>(&self, alg: &A, graph: &Graph, trace: &Trace<A::State>, m: &mut MonitorSummary) -> Option<AllianceReport>
    where
        A: Algorithm<State = ComposedState<AllianceState>>,
    {
        let r = analyze_alliance(alg, self, graph, trace);
        m.add_named("col_rejoined", r.col_rejoined.len());
        m.add_named("clr_not_local_central", r.clr_not_local_central.len());
        m.add_named("ladder_stalls", r.ladder_stalls.len());
        Some(r)
    }

    fn oracle(&self, graph: &Graph, config: &[ComposedState<AllianceState>]) -> Option<(Vec<bool>, bool, bool)> {
        let members = alliance::members(config);
        let p = Fga::params(self);
        let alliance = is_fg_alliance(&members, graph, p);
        let one_minimal = is_1_minimal(&members, graph, p).unwrap_or(false);
        Some((members, alliance, one_minimal))
    }
}

/// Runs `cfg` with `seed`. The trace is serialized only if `keep_trace`.
pub fn execute(cfg: &RunConfig, seed: u64, keep_trace: bool) -> Result<Outcome, RunError> {
    let prep = cfg.prepare(seed)?;
    match &prep.program {
        Program::Unison(u) => drive(cfg, &prep, seed, u, keep_trace),
        Program::Alliance(f) => drive(cfg, &prep, seed, f, keep_trace),
    }
}

fn initial<W>(cfg: &RunConfig, inner: &W, graph: &Graph, seed: u64) -> Result<Vec<ComposedState<W::State>>, ConfigError>
where
    W: Workload,
    W::State: Serialize + for<'de> Deserialize<'de>,
{
    Ok(match cfg.init {
        InitMode::GammaInit => inner.gamma_init(graph),
        InitMode::Random => {
            // Stream 1 keeps the initial draw independent of the daemon's RNG.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let mut c = inner.random_config(graph, &mut rng);
            if !cfg.algorithm.composed() {
                // Frozen reset variables: anything but clean would only freeze processes.
                for s in &mut c {
                    s.sdr = SdrState::CLEAN;
                }
            }
            c
        }
        InitMode::File => load_init(
            inner,
            graph,
            cfg.init_file.as_deref().expect("validated: file mode has a path"),
        )?,
    })
}

fn drive<W>(cfg: &RunConfig, prep: &Prepared, seed: u64, inner: &W, keep_trace: bool) -> Result<Outcome, RunError>
where
    W: Workload,
    W::State: Serialize + for<'de> Deserialize<'de>,
{
    let graph = &prep.graph;
    let init = initial(cfg, inner, graph, seed)?;
    let init_json = serde_json::to_string_pretty(&init).expect("states serialize");
    let mut daemon = Daemon::new(prep.daemon, seed);
    let after = cfg.after_normal.unwrap_or(DEFAULT_AFTER_NORMAL);
    let mut first_normal: Option<usize> = None;
    let stop = |t: &Trace<ComposedState<W::State>>| {
        if !W::PERPETUAL {
            return false;
        }
        if first_normal.is_none() && is_normal(inner, graph, t.current()) {
            first_normal = Some(t.steps.len());
        }
        first_normal.is_some_and(|f| t.steps.len() >= f + after)
    };

    let mut monitors = cfg.monitors.then(MonitorSummary::default);
    let mut analysis = None;
    let mut alliance_report = None;
    let trace = if cfg.algorithm.composed() {
        let sdr = Sdr::with_mutation(inner.clone(), prep.sdr_mutation);
        let trace = run_until(&sdr, graph, init, &mut daemon, prep.limits, stop)?;
        if let Some(m) = monitors.as_mut() {
            let extra = inner.extra_predicates();
            let opts = AnalysisOptions {
                branches: cfg.branches,
                requirements: true,
            };
            let mut r = analyze(&sdr, graph, &trace, &extra, opts);
            for v in std::mem::take(&mut r.violations) {
                m.add(v);
            }
            alliance_report = inner.trace_checks(&sdr, graph, &trace, m);
            analysis = Some(r);
        }
        trace
    } else {
        let alg = Standalone(inner.clone());
        let trace = run_until(&alg, graph, init, &mut daemon, prep.limits, stop)?;
        if let Some(m) = monitors.as_mut() {
            for p in inner.extra_predicates() {
                m.add_named(p.name, closure_breaks(&p, graph, &trace));
            }
            alliance_report = inner.trace_checks(&alg, graph, &trace, m);
        }
        trace
    };

    let n = graph.n();
    let first_normal = (0..trace.configs.len()).find(|&i| is_normal(inner, graph, &trace.configs[i]));
    let moves_to = |idx: usize| -> u64 { trace.steps[..idx].iter().map(|s| s.activated.len() as u64).sum() };
    let rounds_to_terminal = trace.terminal.then(|| trace.round_of(trace.steps.len()));
    let mut report = Report {
        algorithm: cfg.algorithm,
        graph: GraphInfo::of(graph),
        daemon: prep.daemon.to_string(),
        seed,
        init: cfg.init,
        k: match &prep.program {
            Program::Unison(u) => Some(u.k()),
            Program::Alliance(_) => None,
        },
        params: inner.params(),
        mutation: cfg.mutation.clone(),
        stop: trace.stop,
        terminal: trace.terminal,
        steps: trace.steps.len(),
        rounds: trace.rounds(),
        total_moves: trace.total_moves(),
        moves_per_process: trace.moves_per_process.clone(),
        first_normal,
        rounds_to_normal: first_normal.map(|i| trace.round_of(i)),
        moves_to_normal: first_normal.map(moves_to),
        rounds_to_terminal,
        bounds: Vec::new(),
        oracle: None,
        monitors: None,
        analysis,
        alliance: alliance_report,
        problems: Vec::new(),
    };

    let sdr_moves = (0..n)
        .map(|u| {
            trace
                .steps
                .iter()
                .filter(|s| s.rule_of(u).is_some_and(is_sdr_rule))
                .count() as u64
        })
        .collect::<Vec<_>>();
    let moves_before_normal: Vec<u64> = {
        let end = first_normal.unwrap_or(trace.steps.len());
        let mut per = vec![0u64; n];
        for s in &trace.steps[..end] {
            for &u in &s.activated {
                per[u] += 1;
            }
        }
        per
    };
    report.bounds = bound_names(cfg.algorithm, cfg.init)
        .into_iter()
        .map(|name| {
            bound_check(name, graph, &report, &sdr_moves, &moves_before_normal)
        })
        .collect();

    if trace.terminal {
        report.oracle = inner
            .oracle(graph, trace.current())
            .map(|(members, alliance, one_minimal)| OracleReport {
                members,
                alliance,
                one_minimal,
                guaranteed: cfg.algorithm.composed() || cfg.init == InitMode::GammaInit,
            });
    }

    // Bare unison legitimately freezes around an out-of-sync edge; with the
    // reset layer, or once legitimate, a terminal configuration is a bug.
    if W::PERPETUAL && trace.terminal {
        if let Some(m) = monitors.as_mut() {
            if is_normal(inner, graph, trace.current()) {
                m.add_named("deadlock_in_legitimate", 1);
            } else if cfg.algorithm.composed() {
                m.add_named("deadlock", 1);
            }
        }
    }
    report.monitors = monitors;
    report.problems = problems(&report, W::PERPETUAL);

    let mut trace_jsonl = Vec::new();
    if keep_trace {
        trace
            .write_jsonl(graph, &mut trace_jsonl)
            .expect("writing to memory");
    }
    Ok(Outcome {
        report,
        trace_jsonl,
        init_json,
    })
}

/// Steps after which the predicate went from true to false at some process.
fn closure_breaks<S>(p: &LocalPredicate<'_, S>, graph: &Graph, trace: &Trace<ComposedState<S>>) -> usize {
    trace
        .transitions()
        .map(|(pre, _, post)| {
            (0..graph.n())
                .filter(|&u| {
                    (p.eval)(&View::new(u, pre, graph, true)) && !(p.eval)(&View::new(u, post, graph, true))
                })
                .count()
        })
        .sum()
}

fn bound_check(
    name: &'static str,
    graph: &Graph,
    r: &Report,
    sdr_moves: &[u64],
    moves_before_normal: &[u64],
) -> BoundCheck {
    let n = graph.n() as u64;
    let m = graph.m() as u64;
    let d = graph.diameter() as u64;
    let dmax = graph.delta_max() as u64;
    let whole = |bound: u64, observed: Option<u64>| BoundCheck {
        name,
        bound,
        observed,
        process: None,
    };
    // Tightest process for a per-process bound.
    let per_process = |bound_of: &dyn Fn(usize) -> u64, moves: &[u64]| {
        let u = (0..moves.len())
            .min_by_key(|&u| bound_of(u) as i64 - moves[u] as i64)
            .expect("nonempty graph");
        BoundCheck {
            name,
            bound: bound_of(u),
            observed: Some(moves[u]),
            process: Some(u),
        }
    };
    let as_u64 = |x: Option<usize>| x.map(|v| v as u64);
    match name {
        ROUNDS_3N => whole(3 * n, as_u64(r.rounds_to_normal)),
        SDR_MOVES => per_process(&|_| 3 * n + 3, sdr_moves),
        UNISON_MOVES => whole(
            (3 * d + 3) * n * n + (3 * d + 1) * (n - 1) + 1,
            r.moves_to_normal,
        ),
        ROUNDS_8N4 => whole(8 * n + 4, as_u64(r.rounds_to_terminal)),
        COMPOSED_MOVES => whole(
            (n + 1) * (16 * m * dmax + 36 * m + 27 * n),
            r.terminal.then_some(r.total_moves),
        ),
        ROUNDS_5N4 => whole(5 * n + 4, as_u64(r.rounds_to_terminal)),
        FGA_PROCESS_MOVES => {
            let bound = |u: usize| {
                let du = graph.degree(u) as u64;
                8 * du * dmax + 18 * du + 24
            };
            let mut b = per_process(&bound, &r.moves_per_process);
            if !r.terminal {
                b.observed = None;
            }
            b
        }
        FGA_TOTAL_MOVES => whole(
            16 * dmax * m + 36 * m + 24 * n,
            r.terminal.then_some(r.total_moves),
        ),
        BARE_MOVES_3D => per_process(&|_| 3 * d, moves_before_normal),
        other => unreachable!("unknown bound {other}"),
    }
}

fn problems(r: &Report, perpetual: bool) -> Vec<String> {
    let mut out = Vec::new();
    for b in r.bounds.iter().filter(|b| !b.ok()) {
        out.push(match b.observed {
            Some(o) => format!("bound {} exceeded: {} > {}", b.name, o, b.bound),
            None => format!("bound {} not established within the limits", b.name),
        });
    }
    if let Some(o) = &r.oracle {
        if o.guaranteed && !o.alliance {
            out.push("terminal member set is not an (f,g)-alliance".into());
        }
        if o.guaranteed && !o.one_minimal {
            out.push("terminal member set is not 1-minimal".into());
        }
    }
    if r.algorithm.composed() && !perpetual && !r.terminal {
        out.push(format!("not silent within the limits (stopped: {:?})", r.stop));
    }
    if r.algorithm.composed() && perpetual && r.first_normal.is_none() {
        out.push(format!("no legitimate configuration within the limits (stopped: {:?})", r.stop));
    }
    if let Some(m) = &r.monitors {
        for (check, count) in &m.counts {
            out.push(format!("monitor {check}: {count} violation(s)"));
        }
    }
    out
}
