use std::io::{self, Write};

use serde::Serialize;
use serde_json::json;

use super::{canonical_hash, enabled, Algorithm, ConfigDigest, Daemon, RuleId, RuleMask};
use crate::graph::Graph;

/// Step and round budgets for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Limits {
    pub max_steps: usize,
    pub max_rounds: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 1_000_000,
            max_rounds: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Terminal,
    MaxSteps,
    MaxRounds,
    Predicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    /// Activated processes, ascending.
    pub activated: Vec<usize>,
    /// Rule executed by each activated process, aligned with `activated`.
    pub rules: Vec<RuleId>,
    pub pre: ConfigDigest,
    pub post: ConfigDigest,
}

impl StepRecord {
    pub fn rule_of(&self, u: usize) -> Option<RuleId> {
        self.activated
            .binary_search(&u)
            .ok()
            .map(|i| self.rules[i])
    }

    pub fn moves(&self) -> impl Iterator<Item = (usize, RuleId)> + '_ {
        self.activated.iter().copied().zip(self.rules.iter().copied())
    }
}

/// Incremental round detection by the neutralization rule: a round ends
/// once every process enabled at its start has moved or become disabled
/// without moving.
#[derive(Debug, Clone)]
pub struct RoundTracker {
    pending: Vec<bool>,
    remaining: usize,
}

impl RoundTracker {
    pub fn new(enabled_at_start: &[RuleMask]) -> Self {
        let pending: Vec<bool> = enabled_at_start.iter().map(|m| !m.is_empty()).collect();
        let remaining = pending.iter().filter(|&&p| p).count();
        RoundTracker { pending, remaining }
    }

    /// Feeds one step; returns true if it completes the current round.
    pub fn observe(&mut self, activated: &[usize], enabled_after: &[RuleMask]) -> bool {
        for &u in activated {
            if std::mem::take(&mut self.pending[u]) {
                self.remaining -= 1;
            }
        }
        for (u, m) in enabled_after.iter().enumerate() {
            if self.pending[u] && m.is_empty() {
                self.pending[u] = false;
                self.remaining -= 1;
            }
        }
        if self.remaining == 0 {
            *self = RoundTracker::new(enabled_after);
            true
        } else {
            false
        }
    }
}

/// A finite execution prefix with full bookkeeping.
#[derive(Debug, Clone)]
pub struct Trace<S> {
    pub spec: String,
    pub rule_names: Vec<&'static str>,
    pub daemon: String,
    pub seed: u64,
    /// `configs[i]` is the configuration after `i` steps.
    pub configs: Vec<Vec<S>>,
    /// Enabled rules per process for each configuration.
    pub enabled: Vec<Vec<RuleMask>>,
    pub hashes: Vec<ConfigDigest>,
    pub steps: Vec<StepRecord>,
    pub moves_per_process: Vec<u64>,
    pub moves_per_rule: Vec<u64>,
    /// Step counts at which rounds end, strictly increasing.
    pub round_boundaries: Vec<usize>,
    pub terminal: bool,
    pub stop: StopReason,
    tracker: RoundTracker,
}

impl<S: Clone + super::Encode + Serialize> Trace<S> {
    pub(crate) fn start<A: Algorithm<State = S>>(
        alg: &A,
        graph: &Graph,
        init: Vec<S>,
        daemon: &Daemon,
    ) -> Self {
        let en = enabled(alg, graph, &init);
        let n = init.len();
        Trace {
            spec: alg.name().to_string(),
            rule_names: alg.rules().to_vec(),
            daemon: daemon.kind().to_string(),
            seed: daemon.seed(),
            hashes: vec![canonical_hash(&init)],
            configs: vec![init],
            tracker: RoundTracker::new(&en),
            enabled: vec![en],
            steps: Vec::new(),
            moves_per_process: vec![0; n],
            moves_per_rule: vec![0; alg.rules().len()],
            round_boundaries: Vec::new(),
            terminal: false,
            stop: StopReason::MaxSteps,
        }
    }

    pub(crate) fn push(
        &mut self,
        mut activated: Vec<(usize, RuleId)>,
        next: Vec<S>,
        next_enabled: Vec<RuleMask>,
    ) {
        activated.sort_unstable();
        let post = canonical_hash(&next);
        let pre = *self.hashes.last().expect("initial hash");
        for &(u, r) in &activated {
            self.moves_per_process[u] += 1;
            self.moves_per_rule[r.0 as usize] += 1;
        }
        let (procs, rules): (Vec<usize>, Vec<RuleId>) = activated.into_iter().unzip();
        if self.tracker.observe(&procs, &next_enabled) {
            self.round_boundaries.push(self.steps.len() + 1);
        }
        self.steps.push(StepRecord {
            activated: procs,
            rules,
            pre,
            post,
        });
        self.hashes.push(post);
        self.configs.push(next);
        self.enabled.push(next_enabled);
    }
}

impl<S> Trace<S> {
    pub fn n(&self) -> usize {
        self.moves_per_process.len()
    }

    pub fn current(&self) -> &[S] {
        self.configs.last().expect("trace has an initial configuration")
    }

    pub fn initial(&self) -> &[S] {
        &self.configs[0]
    }

    pub fn is_current_terminal(&self) -> bool {
        self.enabled
            .last()
            .is_some_and(|en| en.iter().all(|m| m.is_empty()))
    }

    /// Completed rounds.
    pub fn rounds(&self) -> usize {
        self.round_boundaries.len()
    }

    pub fn total_moves(&self) -> u64 {
        self.moves_per_process.iter().sum()
    }

    /// Number of the round during which configuration `idx` is reached
    /// (0 for the initial configuration). An unfinished last round counts.
    pub fn round_of(&self, idx: usize) -> usize {
        if idx == 0 {
            return 0;
        }
        match self.round_boundaries.binary_search(&idx) {
            Ok(r) | Err(r) => r + 1,
        }
    }

    /// Rounds, counted afresh from configuration `start`, needed to reach
    /// configuration `end`.
    pub fn rounds_between(&self, start: usize, end: usize) -> usize {
        if end <= start {
            return 0;
        }
        let mut tracker = RoundTracker::new(&self.enabled[start]);
        let mut rounds = 0;
        for i in start..end {
            if tracker.observe(&self.steps[i].activated, &self.enabled[i + 1]) {
                rounds += 1;
                if i + 1 == end {
                    return rounds;
                }
            }
        }
        rounds + 1
    }

    /// Every step of the trace, each with its pre and post configuration.
    pub fn transitions(&self) -> impl Iterator<Item = (&[S], &StepRecord, &[S])> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| (self.configs[i].as_slice(), s, self.configs[i + 1].as_slice()))
    }

    /// JSON-lines export: header, one line per step, footer.
    pub fn write_jsonl<W: Write>(&self, graph: &Graph, mut out: W) -> io::Result<()> {
        let header = json!({
            "kind": "header",
            "graph": graph.digest(),
            "n": graph.n(),
            "spec": self.spec,
            "daemon": self.daemon,
            "seed": self.seed,
            "initial": self.hashes[0],
        });
        writeln!(out, "{header}")?;
        for (i, s) in self.steps.iter().enumerate() {
            let line = json!({
                "kind": "step",
                "index": i,
                "activated": s.activated,
                "rules": s.rules.iter().map(|r| self.rule_names[r.0 as usize]).collect::<Vec<_>>(),
                "pre": s.pre,
                "post": s.post,
            });
            writeln!(out, "{line}")?;
        }
        let per_rule: serde_json::Map<String, serde_json::Value> = self
            .rule_names
            .iter()
            .zip(&self.moves_per_rule)
            .map(|(name, c)| (name.to_string(), json!(c)))
            .collect();
        let footer = json!({
            "kind": "footer",
            "steps": self.steps.len(),
            "moves": self.total_moves(),
            "moves_per_process": self.moves_per_process,
            "moves_per_rule": per_rule,
            "rounds": self.rounds(),
            "round_boundaries": self.round_boundaries,
            "terminal": self.terminal,
            "stop": self.stop,
        });
        writeln!(out, "{footer}")
    }
}
