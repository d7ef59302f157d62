use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{default_choices, enabled, step, Algorithm, EngineError, RuleId, RuleMask};
use crate::graph::Graph;

/// Activation policy. All variants are unfair: none guarantees that a
/// continuously enabled process is eventually chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DaemonKind {
    /// Every enabled process moves.
    Synchronous,
    /// One enabled process, uniformly.
    CentralRandom,
    /// Each enabled process independently with probability `p`, resampled
    /// until the draw is nonempty.
    SubsetRandom(f64),
    /// Among all singletons and the full enabled set, the activation that
    /// leaves the most processes enabled; ties go to the earliest candidate
    /// (singletons by index, then the full set).
    GreedyAdversary,
}

impl DaemonKind {
    pub const ALL: [DaemonKind; 4] = [
        DaemonKind::Synchronous,
        DaemonKind::CentralRandom,
        DaemonKind::SubsetRandom(0.5),
        DaemonKind::GreedyAdversary,
    ];
}

impl fmt::Display for DaemonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DaemonKind::Synchronous => f.write_str("synchronous"),
            DaemonKind::CentralRandom => f.write_str("central_random"),
            DaemonKind::SubsetRandom(p) => write!(f, "subset_random({p})"),
            DaemonKind::GreedyAdversary => f.write_str("greedy_adversary"),
        }
    }
}

impl FromStr for DaemonKind {
    type Err = String;

    /// Accepts `synchronous`, `central_random`, `greedy_adversary`,
    /// `subset_random` (p = 0.5), `subset_random(p)` or `subset_random:p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "synchronous" => return Ok(DaemonKind::Synchronous),
            "central_random" => return Ok(DaemonKind::CentralRandom),
            "greedy_adversary" => return Ok(DaemonKind::GreedyAdversary),
            "subset_random" => return Ok(DaemonKind::SubsetRandom(0.5)),
            _ => {}
        }
        let p = s
            .strip_prefix("subset_random(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("subset_random:"))
            .ok_or_else(|| format!("unknown daemon `{s}`"))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| format!("bad probability in `{s}`"))?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(format!("subset_random probability must be in (0, 1], got {p}"));
        }
        Ok(DaemonKind::SubsetRandom(p))
    }
}

/// A seeded daemon instance.
#[derive(Debug, Clone)]
pub struct Daemon {
    kind: DaemonKind,
    seed: u64,
    rng: ChaCha8Rng,
}

impl Daemon {
    pub fn new(kind: DaemonKind, seed: u64) -> Self {
        Daemon {
            kind,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kind(&self) -> DaemonKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Picks a nonempty activation, one rule per activated process.
    pub fn select<A: Algorithm>(
        &mut self,
        alg: &A,
        graph: &Graph,
        config: &[A::State],
        enabled_now: &[RuleMask],
    ) -> Result<Vec<(usize, RuleId)>, EngineError> {
        let candidates: Vec<usize> = (0..enabled_now.len())
            .filter(|&u| !enabled_now[u].is_empty())
            .collect();
        if candidates.is_empty() {
            return Err(EngineError::EmptyActivation);
        }
        let chosen: Vec<usize> = match self.kind {
            DaemonKind::Synchronous => candidates,
            DaemonKind::CentralRandom => {
                vec![candidates[self.rng.random_range(0..candidates.len())]]
            }
            DaemonKind::SubsetRandom(p) => loop {
                let pick: Vec<usize> = candidates
                    .iter()
                    .copied()
                    .filter(|_| self.rng.random_bool(p))
                    .collect();
                if !pick.is_empty() {
                    break pick;
                }
            },
            DaemonKind::GreedyAdversary => {
                let mut options: Vec<Vec<usize>> = candidates.iter().map(|&u| vec![u]).collect();
                if candidates.len() > 1 {
                    options.push(candidates.clone());
                }
                let mut best: Option<(usize, Vec<usize>)> = None;
                for opt in options {
                    let act = default_choices(alg, enabled_now, opt.iter().copied());
                    let next = step(alg, graph, config, &act)?;
                    let score = enabled(alg, graph, &next)
                        .iter()
                        .filter(|m| !m.is_empty())
                        .count();
                    if best.as_ref().is_none_or(|(s, _)| score > *s) {
                        best = Some((score, opt));
                    }
                }
                best.map(|(_, o)| o).unwrap_or_default()
            }
        };
        Ok(default_choices(alg, enabled_now, chosen))
    }
}
