//! Composite-atomicity execution: guard evaluation over closed-neighborhood
//! views, daemon-driven steps, maximal executions, and move/round accounting.

mod daemon;
mod trace;

use std::fmt::{self, Debug};
use std::hash::Hash;

use serde::Serialize;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::graph::Graph;

pub use daemon::{Daemon, DaemonKind};
pub use trace::{Limits, RoundTracker, StepRecord, StopReason, Trace};

/// Index of a rule in an algorithm's fixed catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RuleId(pub u16);

/// Set of rules enabled at one process.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RuleMask(u32);

impl RuleMask {
    pub const EMPTY: RuleMask = RuleMask(0);

    pub fn single(rule: RuleId) -> Self {
        RuleMask(1 << rule.0)
    }

    pub fn with(self, rule: RuleId, enabled: bool) -> Self {
        if enabled {
            RuleMask(self.0 | 1 << rule.0)
        } else {
            self
        }
    }

    pub fn contains(self, rule: RuleId) -> bool {
        self.0 & (1 << rule.0) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Rules shifted up by `offset` catalog slots (for composition).
    pub fn shifted(self, offset: u16) -> Self {
        RuleMask(self.0 << offset)
    }

    pub fn union(self, other: RuleMask) -> Self {
        RuleMask(self.0 | other.0)
    }

    pub fn lowest(self) -> Option<RuleId> {
        (self.0 != 0).then(|| RuleId(self.0.trailing_zeros() as u16))
    }

    pub fn iter(self) -> impl Iterator<Item = RuleId> {
        (0..32u16).filter(move |i| self.0 & (1 << i) != 0).map(RuleId)
    }
}

/// Injective byte encoding of a state, used for canonical hashing.
pub trait Encode {
    fn encode(&self, out: &mut Vec<u8>);
}

/// 256-bit configuration digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfigDigest(pub [u8; 32]);

impl fmt::Display for ConfigDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl Debug for ConfigDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConfigDigest({self})")
    }
}

impl Serialize for ConfigDigest {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.collect_str(self)
    }
}

/// Stable digest of the full configuration (length-prefixed per process).
pub fn canonical_hash<S: Encode>(config: &[S]) -> ConfigDigest {
    let mut buf = Vec::with_capacity(16 * config.len() + 8);
    buf.extend_from_slice(&(config.len() as u64).to_le_bytes());
    for s in config {
        let start = buf.len();
        buf.extend_from_slice(&[0; 4]);
        s.encode(&mut buf);
        let len = (buf.len() - start - 4) as u32;
        buf[start..start + 4].copy_from_slice(&len.to_le_bytes());
    }
    ConfigDigest(Sha256::digest(&buf).into())
}

/// Read-only snapshot of a process's closed neighborhood.
///
/// Neighbors are exposed in adjacency order (local labels). Global indices
/// are only reachable when the algorithm is identified.
pub struct View<'a, S> {
    me: usize,
    states: &'a [S],
    graph: &'a Graph,
    identified: bool,
}

impl<S> Clone for View<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for View<'_, S> {}

impl<'a, S> View<'a, S> {
    pub fn new(me: usize, states: &'a [S], graph: &'a Graph, identified: bool) -> Self {
        View {
            me,
            states,
            graph,
            identified,
        }
    }

    pub fn own(&self) -> &'a S {
        &self.states[self.me]
    }

    pub fn degree(&self) -> usize {
        self.graph.degree(self.me)
    }

    /// Neighbor states in local-label order.
    pub fn neighbors(&self) -> impl Iterator<Item = &'a S> + 'a {
        let states = self.states;
        self.graph.neighbors(self.me).iter().map(move |&v| &states[v])
    }

    /// Own state followed by the neighbors.
    pub fn closed(&self) -> impl Iterator<Item = &'a S> + 'a {
        std::iter::once(self.own()).chain(self.neighbors())
    }

    pub fn is_identified(&self) -> bool {
        self.identified
    }

    /// Own global index; `None` for anonymous algorithms.
    pub fn me(&self) -> Option<usize> {
        self.identified.then_some(self.me)
    }

    /// Neighbors with their global indices; empty for anonymous algorithms.
    pub fn identified_neighbors(&self) -> impl Iterator<Item = (usize, &'a S)> + 'a {
        let states = self.states;
        let ids: &'a [usize] = if self.identified {
            self.graph.neighbors(self.me)
        } else {
            &[]
        };
        ids.iter().map(move |&v| (v, &states[v]))
    }

    /// State of `v` if the algorithm is identified and `v ∈ N[me]`.
    pub fn state_of(&self, v: usize) -> Option<&'a S> {
        (self.identified && (v == self.me || self.graph.is_neighbor(self.me, v)))
            .then(|| &self.states[v])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("distance overflow")]
    DistanceOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("daemon activated an empty set")]
    EmptyActivation,
    #[error("process {0} activated twice in one step")]
    DuplicateActivation(usize),
    #[error("rule {rule:?} is not enabled at process {process}")]
    NotEnabled { process: usize, rule: RuleId },
    #[error("process {process} has {count} enabled rules but the algorithm requires exclusivity")]
    MutualExclusion { process: usize, count: usize },
    #[error("action of process {process} failed: {source}")]
    Action {
        process: usize,
        #[source]
        source: ActionError,
    },
    #[error("configuration has {got} states, graph has {expected} processes")]
    ConfigLength { got: usize, expected: usize },
}

/// A distributed algorithm: one guarded-command program per process.
pub trait Algorithm {
    type State: Clone + Eq + Hash + Debug + Serialize + Encode;

    fn name(&self) -> &str;

    /// Fixed rule catalog; `RuleId(i)` names `rules()[i]`.
    fn rules(&self) -> &[&'static str];

    /// Whether processes may read global identities.
    fn identified(&self) -> bool;

    fn enabled_rules(&self, view: &View<'_, Self::State>) -> RuleMask;

    /// New state of the acting process. Only meaningful when `rule` is enabled.
    fn apply(&self, rule: RuleId, view: &View<'_, Self::State>)
        -> Result<Self::State, ActionError>;

    /// Rule the daemon executes when several are enabled at one process.
    fn choose_rule(&self, enabled: RuleMask) -> Option<RuleId> {
        enabled.lowest()
    }

    /// When true, more than one enabled rule at a process is an engine error.
    fn exclusive_rules(&self) -> bool {
        true
    }

    fn view<'a>(&self, graph: &'a Graph, config: &'a [Self::State], u: usize) -> View<'a, Self::State> {
        View::new(u, config, graph, self.identified())
    }

    fn rule_name(&self, rule: RuleId) -> &'static str {
        self.rules()[rule.0 as usize]
    }
}

/// Enabled rules of every process.
pub fn enabled<A: Algorithm>(alg: &A, graph: &Graph, config: &[A::State]) -> Vec<RuleMask> {
    (0..config.len())
        .map(|u| alg.enabled_rules(&alg.view(graph, config, u)))
        .collect()
}

pub fn is_terminal<A: Algorithm>(alg: &A, graph: &Graph, config: &[A::State]) -> bool {
    (0..config.len()).all(|u| alg.enabled_rules(&alg.view(graph, config, u)).is_empty())
}

/// Rejects configurations that break the algorithm's exclusivity contract.
pub fn check_exclusive<A: Algorithm>(alg: &A, enabled: &[RuleMask]) -> Result<(), EngineError> {
    if alg.exclusive_rules() {
        if let Some((process, m)) = enabled.iter().enumerate().find(|(_, m)| m.len() > 1) {
            return Err(EngineError::MutualExclusion {
                process,
                count: m.len(),
            });
        }
    }
    Ok(())
}

/// One atomic step: every activated process evaluates its action on the
/// pre-configuration, then all writes land together.
pub fn step<A: Algorithm>(
    alg: &A,
    graph: &Graph,
    config: &[A::State],
    activated: &[(usize, RuleId)],
) -> Result<Vec<A::State>, EngineError> {
    if config.len() != graph.n() {
        return Err(EngineError::ConfigLength {
            got: config.len(),
            expected: graph.n(),
        });
    }
    if activated.is_empty() {
        return Err(EngineError::EmptyActivation);
    }
    let mut seen = vec![false; config.len()];
    let mut writes = Vec::with_capacity(activated.len());
    for &(u, rule) in activated {
        if std::mem::replace(&mut seen[u], true) {
            return Err(EngineError::DuplicateActivation(u));
        }
        let view = alg.view(graph, config, u);
        if !alg.enabled_rules(&view).contains(rule) {
            return Err(EngineError::NotEnabled { process: u, rule });
        }
        let next = alg
            .apply(rule, &view)
            .map_err(|source| EngineError::Action { process: u, source })?;
        writes.push((u, next));
    }
    let mut out = config.to_vec();
    for (u, s) in writes {
        out[u] = s;
    }
    Ok(out)
}

/// Activation list pairing each chosen process with its default rule.
pub fn default_choices<A: Algorithm>(
    alg: &A,
    enabled: &[RuleMask],
    processes: impl IntoIterator<Item = usize>,
) -> Vec<(usize, RuleId)> {
    processes
        .into_iter()
        .filter_map(|u| alg.choose_rule(enabled[u]).map(|r| (u, r)))
        .collect()
}

/// Drives `init` under `daemon` until a terminal configuration or a limit.
pub fn run<A: Algorithm>(
    alg: &A,
    graph: &Graph,
    init: Vec<A::State>,
    daemon: &mut Daemon,
    limits: Limits,
) -> Result<Trace<A::State>, EngineError> {
    run_until(alg, graph, init, daemon, limits, |_| false)
}

/// Like [`run`], also stopping once `stop` holds on the trace so far.
pub fn run_until<A, F>(
    alg: &A,
    graph: &Graph,
    init: Vec<A::State>,
    daemon: &mut Daemon,
    limits: Limits,
    mut stop: F,
) -> Result<Trace<A::State>, EngineError>
where
    A: Algorithm,
    F: FnMut(&Trace<A::State>) -> bool,
{
    if init.len() != graph.n() {
        return Err(EngineError::ConfigLength {
            got: init.len(),
            expected: graph.n(),
        });
    }
    let mut trace = Trace::start(alg, graph, init, daemon);
    check_exclusive(alg, trace.enabled.last().expect("initial enabled set"))?;
    loop {
        if trace.is_current_terminal() {
            trace.terminal = true;
            trace.stop = StopReason::Terminal;
            break;
        }
        if stop(&trace) {
            trace.stop = StopReason::Predicate;
            break;
        }
        if trace.steps.len() >= limits.max_steps {
            trace.stop = StopReason::MaxSteps;
            break;
        }
        if trace.rounds() >= limits.max_rounds {
            trace.stop = StopReason::MaxRounds;
            break;
        }
        let config = trace.current();
        let en = trace.enabled.last().expect("enabled set per configuration");
        let activated = daemon.select(alg, graph, config, en)?;
        let next = step(alg, graph, config, &activated)?;
        let next_enabled = enabled(alg, graph, &next);
        check_exclusive(alg, &next_enabled)?;
        trace.push(activated, next, next_enabled);
    }
    Ok(trace)
}
