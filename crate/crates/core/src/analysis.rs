//! Trace- and configuration-level monitors for the reset layer: alive and
//! dead roots, reset branches, segments, closure checks, the attractor
//! ladder, and bound reports.

use serde::Serialize;

use crate::alliance::{AllianceState, Fga, RULE_CLR};
use crate::engine::{Algorithm, RuleId, Trace, View};
use crate::graph::Graph;
use crate::sdr::{
    is_sdr_rule, monitor_requirements, sdr_predicates, ComposedState, InputAlgorithm, Requirement,
    Sdr, SdrPredicates, Status, INNER_OFFSET, RULE_C, RULE_R, RULE_RB, RULE_RF,
};

/// Bitset over processes (n ≤ 64).
pub type ProcMask = u64;

fn bit(u: usize) -> ProcMask {
    1 << u
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RootSets {
    pub alive: Vec<usize>,
    pub dead: Vec<usize>,
}

fn views<'a, I: InputAlgorithm>(
    inner: &I,
    graph: &'a Graph,
    config: &'a [ComposedState<I::State>],
) -> impl Iterator<Item = View<'a, ComposedState<I::State>>> {
    let identified = inner.identified();
    (0..config.len()).map(move |u| View::new(u, config, graph, identified))
}

fn is_dead_root<S>(view: &View<'_, ComposedState<S>>) -> bool {
    let me = view.own().sdr;
    me.st == Status::RF
        && view
            .neighbors()
            .all(|v| v.sdr.st == Status::C || v.sdr.d >= me.d)
}

/// Alive roots (`P_Up ∨ P_root`) and dead roots.
pub fn compute_roots<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
) -> RootSets {
    let mut out = RootSets::default();
    for (u, view) in views(inner, graph, config).enumerate() {
        let p = sdr_predicates(inner, &view);
        if p.p_up || p.p_root {
            out.alive.push(u);
        }
        if is_dead_root(&view) {
            out.dead.push(u);
        }
    }
    out
}

/// `v` is a reset parent of `u`.
pub fn rparent<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
    v: usize,
    u: usize,
) -> bool {
    let (su, sv) = (&config[u], &config[v]);
    graph.is_neighbor(u, v)
        && su.sdr.st != Status::C
        && inner.p_reset(&su.inner)
        && su.sdr.d > sv.sdr.d
        && (su.sdr.st == sv.sdr.st || sv.sdr.st == Status::RB)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchIssue {
    /// More processes than the network has.
    TooLong,
    /// Statuses do not read as broadcast then feedback.
    StatusPattern,
    /// Distances do not strictly increase.
    DistanceOrder,
    /// A process that should lie on some branch lies on none.
    Uncovered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchViolation {
    pub issue: BranchIssue,
    pub process: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Branches {
    /// Maximal branches, each starting at a root.
    pub branches: Vec<Vec<usize>>,
    pub violations: Vec<BranchViolation>,
}

/// Checks one branch's shape, returning the first issue found.
pub fn check_branch<S>(config: &[ComposedState<S>], branch: &[usize]) -> Option<BranchIssue> {
    if branch.len() > config.len() {
        return Some(BranchIssue::TooLong);
    }
    if branch
        .windows(2)
        .any(|w| config[w[1]].sdr.d <= config[w[0]].sdr.d)
    {
        return Some(BranchIssue::DistanceOrder);
    }
    let mut seen_rf = false;
    for &u in branch {
        match config[u].sdr.st {
            Status::RB if seen_rf => return Some(BranchIssue::StatusPattern),
            Status::RB => {}
            Status::RF => seen_rf = true,
            Status::C if branch.len() > 1 => return Some(BranchIssue::StatusPattern),
            Status::C => {}
        }
    }
    None
}

/// Depth-first enumeration of maximal reset branches from every root.
///
/// Coverage: every process with a non-clean status or an inconsistent
/// input state must lie on some branch, except a clean process that is
/// about to join a neighbor's broadcast (`P_RB`), which is neither a root
/// nor anyone's reset child.
pub fn enumerate_branches<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
) -> Branches {
    let roots = compute_roots(inner, graph, config);
    let mut starts: Vec<usize> = roots.alive.iter().chain(&roots.dead).copied().collect();
    starts.sort_unstable();
    starts.dedup();
    let mut out = Branches::default();
    let mut covered: ProcMask = 0;
    let mut path = Vec::new();
    for &r in &starts {
        path.clear();
        path.push(r);
        extend(inner, graph, config, &mut path, &mut out.branches, &mut covered);
    }
    for b in &out.branches {
        if let Some(issue) = check_branch(config, b) {
            out.violations.push(BranchViolation {
                issue,
                process: b[0],
            });
        }
    }
    for (u, view) in views(inner, graph, config).enumerate() {
        let p = sdr_predicates(inner, &view);
        let must = view.own().sdr.st != Status::C || !p.p_icorrect;
        let exempt = view.own().sdr.st == Status::C && p.p_rb;
        if must && !exempt && covered & bit(u) == 0 {
            out.violations.push(BranchViolation {
                issue: BranchIssue::Uncovered,
                process: u,
            });
        }
    }
    out
}

fn extend<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    covered: &mut ProcMask,
) {
    let last = *path.last().expect("nonempty path");
    *covered |= bit(last);
    let mut extended = false;
    for &u in graph.neighbors(last) {
        if rparent(inner, graph, config, last, u) {
            extended = true;
            path.push(u);
            extend(inner, graph, config, path, out, covered);
            path.pop();
        }
    }
    if !extended {
        out.push(path.clone());
    }
}

/// Per-configuration digest used by the trace monitors.
#[derive(Debug, Clone)]
pub struct ConfigSummary {
    pub preds: Vec<SdrPredicates>,
    pub alive: ProcMask,
    pub normal: bool,
    /// Largest k in 0..=4 such that the configuration is in P_k
    /// (0: some process still satisfies `P_Up`).
    pub ladder: u8,
}

pub fn summarize<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
) -> ConfigSummary {
    let preds: Vec<SdrPredicates> = views(inner, graph, config)
        .map(|v| sdr_predicates(inner, &v))
        .collect();
    let alive = preds
        .iter()
        .enumerate()
        .filter(|(_, p)| p.p_up || p.p_root)
        .fold(0, |m, (u, _)| m | bit(u));
    let normal = preds.iter().all(|p| p.p_clean && p.p_icorrect);
    let p1 = preds.iter().all(|p| !p.p_up);
    let p2 = p1 && preds.iter().all(|p| !p.p_rb);
    let p3 = p2 && config.iter().all(|s| s.sdr.st != Status::RB);
    let p4 = p3 && config.iter().all(|s| s.sdr.st != Status::RF);
    let ladder = [p1, p2, p3, p4].iter().take_while(|&&b| b).count() as u8;
    ConfigSummary {
        preds,
        alive,
        normal,
        ladder,
    }
}

/// Steps `[start, end)` of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub alive_roots: usize,
}

/// Splits the trace where the number of alive roots strictly drops; the
/// dropping step closes its segment. Also returns the steps where the
/// alive-root set was not included in its predecessor.
pub fn segment_partition(summaries: &[ConfigSummary]) -> (Vec<Segment>, Vec<usize>) {
    let mut segments = Vec::new();
    let mut grew = Vec::new();
    let mut start = 0;
    for i in 0..summaries.len().saturating_sub(1) {
        let (a, b) = (summaries[i].alive, summaries[i + 1].alive);
        if b & !a != 0 {
            grew.push(i);
        }
        if b.count_ones() < a.count_ones() {
            segments.push(Segment {
                start,
                end: i + 1,
                alive_roots: a.count_ones() as usize,
            });
            start = i + 1;
        }
    }
    let last = summaries.len().saturating_sub(1);
    segments.push(Segment {
        start,
        end: last,
        alive_roots: summaries.get(start).map_or(0, |s| s.alive.count_ones() as usize),
    });
    (segments, grew)
}

/// Accepts `(rule_C + ε)(rule_RB + rule_R + ε)(rule_RF + ε)`.
pub fn segment_language_ok(rules: &[RuleId]) -> bool {
    let mut phase = 0;
    for &r in rules {
        let next = match r {
            RULE_C => 1,
            RULE_RB | RULE_R => 2,
            RULE_RF => 3,
            _ => continue,
        };
        if next <= phase {
            return false;
        }
        phase = next;
    }
    true
}

/// Which steps a closure check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllSteps,
    /// Only steps in which no process executes a reset-layer rule.
    InputStepsOnly,
}

pub type LocalEval<'f, S> = Box<dyn Fn(&View<'_, ComposedState<S>>) -> bool + 'f>;

/// A named per-process predicate whose closure is monitored.
pub struct LocalPredicate<'f, S> {
    pub name: &'static str,
    pub scope: Scope,
    pub eval: LocalEval<'f, S>,
}

/// Closure predicates specific to the alliance algorithm.
pub fn alliance_predicates(fga: &Fga) -> Vec<LocalPredicate<'_, AllianceState>> {
    vec![
        LocalPredicate {
            name: "scr_surplus_or_no_ptr",
            scope: Scope::AllSteps,
            eval: Box::new(|v| v.own().inner.scr == 1 || v.own().inner.ptr.is_none()),
        },
        LocalPredicate {
            name: "clean_and_consistent",
            scope: Scope::InputStepsOnly,
            eval: Box::new(move |v| {
                crate::sdr::p_clean(v) && fga.p_icorrect(&crate::sdr::InnerView::new(v))
            }),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    NotUpClosed,
    CorrectOrRbClosed,
    NotRootNotUpClosed,
    NotR1Closed,
    NotR2Closed,
    Local(&'static str),
    AliveRootsGrew,
    SegmentCount,
    SegmentLanguage,
    Branch(BranchIssue),
    NormalNotAbsorbing,
    LadderNotMonotone,
    TopLevelNotNormal,
    Requirement(Requirement),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: Check,
    /// Step index for step checks, configuration index for state checks.
    pub at: usize,
    pub process: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AnalysisOptions {
    /// Enumerate reset branches in every configuration.
    pub branches: bool,
    /// Run the composition-contract monitor.
    pub requirements: bool,
}

impl AnalysisOptions {
    pub fn all() -> Self {
        AnalysisOptions {
            branches: true,
            requirements: true,
        }
    }
}

/// Bound-relevant measurements of one trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub spec: String,
    pub daemon: String,
    pub seed: u64,
    pub n: usize,
    pub steps: usize,
    pub rounds: usize,
    pub terminal: bool,
    pub total_moves: u64,
    pub moves_per_process: Vec<u64>,
    pub sdr_moves_per_process: Vec<u64>,
    /// First configuration index that is normal.
    pub first_normal: Option<usize>,
    pub rounds_to_normal: Option<usize>,
    pub moves_to_normal: Option<u64>,
    pub rounds_to_terminal: Option<usize>,
    /// Rounds spent reaching P1, then P2 from P1, P3 from P2, P4 from P3.
    pub ladder_rounds: [Option<usize>; 4],
    pub segments: usize,
    pub max_branch_len: usize,
    pub violations: Vec<Violation>,
}

/// Runs every generic monitor over a trace of `I ∘ SDR`.
pub fn analyze<I: InputAlgorithm>(
    sdr: &Sdr<I>,
    graph: &Graph,
    trace: &Trace<ComposedState<I::State>>,
    extra: &[LocalPredicate<'_, I::State>],
    opts: AnalysisOptions,
) -> TraceReport {
    let inner = sdr.inner();
    let n = graph.n();
    let summaries: Vec<ConfigSummary> = trace
        .configs
        .iter()
        .map(|c| summarize(inner, graph, c))
        .collect();
    let mut violations = Vec::new();
    let mut flag = |check, at, process| {
        violations.push(Violation { check, at, process })
    };

    // Per-process closures of the reset layer.
    for (i, step) in trace.steps.iter().enumerate() {
        let (a, b) = (&summaries[i].preds, &summaries[i + 1].preds);
        for u in 0..n {
            let checks = [
                (Check::NotUpClosed, !a[u].p_up, !b[u].p_up),
                (
                    Check::CorrectOrRbClosed,
                    a[u].p_correct || a[u].p_rb,
                    b[u].p_correct || b[u].p_rb,
                ),
                (
                    Check::NotRootNotUpClosed,
                    !a[u].p_root && !a[u].p_up,
                    !b[u].p_root && !b[u].p_up,
                ),
                (Check::NotR1Closed, !a[u].p_r1, !b[u].p_r1),
                (Check::NotR2Closed, !a[u].p_r2, !b[u].p_r2),
            ];
            for (check, before, after) in checks {
                if before && !after {
                    flag(check, i, Some(u));
                }
            }
        }
        let input_only = step.rules.iter().all(|&r| !is_sdr_rule(r));
        for p in extra {
            if p.scope == Scope::InputStepsOnly && !input_only {
                continue;
            }
            for u in 0..n {
                let pre = View::new(u, &trace.configs[i], graph, inner.identified());
                let post = View::new(u, &trace.configs[i + 1], graph, inner.identified());
                if (p.eval)(&pre) && !(p.eval)(&post) {
                    flag(Check::Local(p.name), i, Some(u));
                }
            }
        }
        if summaries[i].normal
            && (!summaries[i + 1].normal || step.rules.iter().any(|&r| is_sdr_rule(r)))
        {
            flag(Check::NormalNotAbsorbing, i, None);
        }
        if summaries[i + 1].ladder < summaries[i].ladder {
            flag(Check::LadderNotMonotone, i, None);
        }
    }
    for (i, s) in summaries.iter().enumerate() {
        if (s.ladder == 4) != s.normal {
            flag(Check::TopLevelNotNormal, i, None);
        }
    }

    // Alive roots and segments.
    let (segments, grew) = segment_partition(&summaries);
    for i in grew {
        flag(Check::AliveRootsGrew, i, None);
    }
    if segments.len() > n + 1 {
        flag(Check::SegmentCount, segments.len(), None);
    }
    let mut seq: Vec<Vec<RuleId>> = vec![Vec::new(); n];
    for seg in &segments {
        seq.iter_mut().for_each(Vec::clear);
        for step in &trace.steps[seg.start..seg.end] {
            for (u, r) in step.moves() {
                if is_sdr_rule(r) {
                    seq[u].push(r);
                }
            }
        }
        for (u, rules) in seq.iter().enumerate() {
            if !segment_language_ok(rules) {
                flag(Check::SegmentLanguage, seg.start, Some(u));
            }
        }
    }

    let mut max_branch_len = 0;
    if opts.branches {
        for (i, c) in trace.configs.iter().enumerate() {
            let b = enumerate_branches(inner, graph, c);
            max_branch_len = max_branch_len.max(b.branches.iter().map(Vec::len).max().unwrap_or(0));
            for v in b.violations {
                flag(Check::Branch(v.issue), i, Some(v.process));
            }
        }
    }
    if opts.requirements {
        for v in monitor_requirements(sdr, graph, trace) {
            flag(Check::Requirement(v.requirement), v.at, Some(v.process));
        }
    }

    // Bounds.
    let first_normal = summaries.iter().position(|s| s.normal);
    let mut ladder_rounds = [None; 4];
    let mut prev = 0;
    for (k, slot) in ladder_rounds.iter_mut().enumerate() {
        match summaries.iter().position(|s| s.ladder as usize > k) {
            Some(t) => {
                *slot = Some(trace.rounds_between(prev, t));
                prev = t;
            }
            None => break,
        }
    }
    let mut sdr_moves = vec![0u64; n];
    for step in &trace.steps {
        for (u, r) in step.moves() {
            if is_sdr_rule(r) {
                sdr_moves[u] += 1;
            }
        }
    }
    let moves_to = |end: usize| -> u64 {
        trace.steps[..end]
            .iter()
            .map(|s| s.activated.len() as u64)
            .sum()
    };
    TraceReport {
        spec: trace.spec.clone(),
        daemon: trace.daemon.clone(),
        seed: trace.seed,
        n,
        steps: trace.steps.len(),
        rounds: trace.rounds(),
        terminal: trace.terminal,
        total_moves: trace.total_moves(),
        moves_per_process: trace.moves_per_process.clone(),
        sdr_moves_per_process: sdr_moves,
        first_normal,
        rounds_to_normal: first_normal.map(|s| trace.round_of(s)),
        moves_to_normal: first_normal.map(moves_to),
        rounds_to_terminal: trace.terminal.then(|| trace.round_of(trace.steps.len())),
        ladder_rounds,
        segments: segments.len(),
        max_branch_len,
        violations,
    }
}

/// Alliance-specific monitors: no alliance rule puts `col` back to true
/// (only a reset may), removals are
/// serialized within closed neighborhoods, and every color-restricted round
/// started at ladder level k ≥ 5 ends at level ≥ min(k + 1, 9).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AllianceReport {
    pub col_rejoined: Vec<(usize, usize)>,
    pub clr_not_local_central: Vec<usize>,
    pub ladder_stalls: Vec<usize>,
    /// Color-restricted rounds observed starting at level ≥ 5.
    pub restricted_rounds: usize,
}

impl AllianceReport {
    pub fn is_clean(&self) -> bool {
        self.col_rejoined.is_empty()
            && self.clr_not_local_central.is_empty()
            && self.ladder_stalls.is_empty()
    }
}

/// Alliance checks over a trace of any algorithm whose state is the
/// composed alliance state; `clr` is the catalog id of `rule_Clr`.
pub fn analyze_alliance<A>(alg: &A, fga: &Fga, graph: &Graph, trace: &Trace<A::State>) -> AllianceReport
where
    A: Algorithm<State = ComposedState<AllianceState>>,
{
    let clr = if alg.rules().len() > fga.rules().len() {
        RuleId(RULE_CLR.0 + INNER_OFFSET)
    } else {
        RULE_CLR
    };
    let mut out = AllianceReport::default();
    for (i, (pre, step, post)) in trace.transitions().enumerate() {
        for (u, rule) in step.moves() {
            let by_input = !is_sdr_rule(rule) || alg.rules().len() == fga.rules().len();
            if by_input && !pre[u].inner.col && post[u].inner.col {
                out.col_rejoined.push((i, u));
            }
        }
        let removing: Vec<usize> = step
            .moves()
            .filter(|&(_, r)| r == clr)
            .map(|(u, _)| u)
            .collect();
        let clash = (0..graph.n()).any(|w| {
            removing
                .iter()
                .filter(|&&u| u == w || graph.is_neighbor(u, w))
                .count()
                > 1
        });
        if clash {
            out.clr_not_local_central.push(i);
        }
    }
    let levels: Vec<u8> = trace
        .configs
        .iter()
        .map(|c| fga.ladder_level(graph, c))
        .collect();
    let mut start = 0;
    for &end in &trace.round_boundaries {
        let restricted = trace.steps[start..end]
            .iter()
            .all(|s| !s.rules.contains(&clr));
        if restricted && levels[start] >= 5 {
            out.restricted_rounds += 1;
            if levels[end] < (levels[start] + 1).min(9) {
                out.ladder_stalls.push(start);
            }
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::sdr::SdrState;
    use crate::unison::{Clock, Unison};

    fn st(st: Status, d: u64, c: u32) -> ComposedState<Clock> {
        ComposedState {
            sdr: SdrState { st, d },
            inner: Clock(c),
        }
    }

    #[test]
    fn language() {
        assert!(segment_language_ok(&[]));
        assert!(segment_language_ok(&[RULE_C, RULE_RB, RULE_RF]));
        assert!(segment_language_ok(&[RULE_R, RULE_RF]));
        assert!(segment_language_ok(&[RULE_C, RuleId(4), RULE_R]));
        assert!(!segment_language_ok(&[RULE_RB, RULE_R]));
        assert!(!segment_language_ok(&[RULE_RF, RULE_C]));
        assert!(!segment_language_ok(&[RULE_C, RULE_C]));
    }

    #[test]
    fn roots_of_simple_configs() {
        let g = Graph::generate(GraphKind::Path, 3, 0).unwrap();
        let u = Unison::new(4, 3).unwrap();
        assert_eq!(compute_roots(&u, &g, &u.gamma_init(&g)), RootSets::default());
        let c = vec![st(Status::C, 0, 0), st(Status::RB, 0, 0), st(Status::C, 0, 0)];
        assert_eq!(compute_roots(&u, &g, &c).alive, vec![1]);
        let c = vec![st(Status::RB, 3, 0), st(Status::RF, 1, 0), st(Status::C, 0, 0)];
        let r = compute_roots(&u, &g, &c);
        assert_eq!(r.dead, vec![1]);
    }

    #[test]
    fn branches_and_pattern() {
        let g = Graph::generate(GraphKind::Path, 3, 0).unwrap();
        let u = Unison::new(4, 3).unwrap();
        let c = vec![st(Status::RB, 0, 0), st(Status::RB, 1, 0), st(Status::RF, 2, 0)];
        let b = enumerate_branches(&u, &g, &c);
        assert_eq!(b.branches, vec![vec![0, 1, 2]]);
        assert!(b.violations.is_empty());
        assert!(enumerate_branches(&u, &g, &u.gamma_init(&g)).branches.is_empty());
        let bad = vec![st(Status::RB, 0, 0), st(Status::RF, 1, 0), st(Status::RB, 2, 0)];
        assert_eq!(check_branch(&bad, &[0, 1, 2]), Some(BranchIssue::StatusPattern));
    }

    #[test]
    fn segments_split_on_drops() {
        let mk = |alive: ProcMask| ConfigSummary {
            preds: Vec::new(),
            alive,
            normal: false,
            ladder: 0,
        };
        let s = vec![mk(0b11), mk(0b11), mk(0b01), mk(0b01), mk(0)];
        let (segs, grew) = segment_partition(&s);
        assert!(grew.is_empty());
        assert_eq!(segs.len(), 3);
        assert_eq!((segs[0].start, segs[0].end), (0, 2));
        assert_eq!((segs[1].start, segs[1].end), (2, 4));
        assert_eq!((segs[2].start, segs[2].end), (4, 4));
        let (_, grew) = segment_partition(&[mk(0b01), mk(0b10)]);
        assert_eq!(grew, vec![0]);
    }
}
