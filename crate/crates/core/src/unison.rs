//! Asynchronous unison: bounded clocks that advance only when no neighbor
//! lags behind. Not self-stabilizing alone; self-stabilizing once composed
//! with the reset layer.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Encode, RuleId, RuleMask, View};
use crate::graph::Graph;
use crate::sdr::{p_clean, random_sdr_state, ComposedState, InnerView, InputAlgorithm, SdrState};

/// A clock value in `0..K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clock(pub u32);

impl Encode for Clock {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0.to_le_bytes());
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnisonError {
    #[error("period K = {k} must exceed the process count n = {n}")]
    PeriodTooSmall { k: u32, n: usize },
}

/// Deliberate faults, for negative-control tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnisonMutation {
    #[default]
    None,
    /// `rule_U` no longer waits for a clean neighborhood.
    IgnoresClean,
    /// `rule_U` also bumps the reset distance.
    WritesDistance,
}

pub const RULE_U: RuleId = RuleId(0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unison {
    k: u32,
    mutation: UnisonMutation,
}

/// `cv` is within one tick of `cu`, modulo `k`.
pub fn p_ok(cu: Clock, cv: Clock, k: u32) -> bool {
    let (u, v) = (cu.0 % k, cv.0 % k);
    v == u || v == (u + 1) % k || v == (u + k - 1) % k
}

impl Unison {
    /// Period `k` for a network of `n` processes; requires `k > n`.
    pub fn new(k: u32, n: usize) -> Result<Self, UnisonError> {
        if (k as usize) <= n {
            return Err(UnisonError::PeriodTooSmall { k, n });
        }
        Ok(Self::new_unchecked(k))
    }

    /// Smallest legal period, `n + 1`.
    pub fn for_graph(graph: &Graph) -> Self {
        Self::new_unchecked(graph.n() as u32 + 1)
    }

    /// Skips the `k > n` check. Only for experiments on illegal periods.
    pub fn new_unchecked(k: u32) -> Self {
        assert!(k >= 1, "period must be positive");
        Unison {
            k,
            mutation: UnisonMutation::None,
        }
    }

    pub fn with_mutation(mut self, mutation: UnisonMutation) -> Self {
        self.mutation = mutation;
        self
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Every neighbor is level with or one tick ahead of this process.
    pub fn clock_up(&self, view: &InnerView<'_, '_, Clock>) -> bool {
        let c = view.own().0;
        view.neighbors()
            .all(|v| v.0 == c || v.0 == (c + 1) % self.k)
    }

    /// All clocks 0, all processes clean.
    pub fn gamma_init(&self, graph: &Graph) -> Vec<ComposedState<Clock>> {
        vec![ComposedState::clean(Clock(0)); graph.n()]
    }

    /// Uniform clocks, statuses and distances in `0..=n`.
    pub fn random_config<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        rng: &mut R,
    ) -> Vec<ComposedState<Clock>> {
        (0..graph.n())
            .map(|_| ComposedState {
                sdr: random_sdr_state(rng, graph.n() as u64),
                inner: Clock(rng.random_range(0..self.k)),
            })
            .collect()
    }

    /// Clean everywhere with every edge within one tick.
    pub fn legitimate(&self, graph: &Graph, config: &[ComposedState<Clock>]) -> bool {
        crate::sdr::is_normal(self, graph, config)
    }

    /// Every edge within one tick, ignoring statuses.
    pub fn safe(&self, graph: &Graph, config: &[ComposedState<Clock>]) -> bool {
        graph
            .edges()
            .into_iter()
            .all(|(u, v)| p_ok(config[u].inner, config[v].inner, self.k))
    }
}

impl InputAlgorithm for Unison {
    type State = Clock;

    fn name(&self) -> &'static str {
        "unison"
    }

    fn rules(&self) -> &'static [&'static str] {
        &["rule_U"]
    }

    fn identified(&self) -> bool {
        false
    }

    fn p_icorrect(&self, view: &InnerView<'_, '_, Clock>) -> bool {
        let c = *view.own();
        view.neighbors().all(|&v| p_ok(c, v, self.k))
    }

    fn p_reset(&self, own: &Clock) -> bool {
        own.0 == 0
    }

    fn reset(&self, _own: &Clock) -> Clock {
        Clock(0)
    }

    fn enabled_rules(&self, view: &View<'_, ComposedState<Clock>>) -> RuleMask {
        let clean = self.mutation == UnisonMutation::IgnoresClean || p_clean(view);
        RuleMask::EMPTY.with(RULE_U, clean && self.clock_up(&InnerView::new(view)))
    }

    fn apply(&self, _rule: RuleId, view: &View<'_, ComposedState<Clock>>) -> ComposedState<Clock> {
        let me = view.own();
        let sdr = match self.mutation {
            UnisonMutation::WritesDistance => SdrState {
                st: me.sdr.st,
                d: me.sdr.d + 1,
            },
            _ => me.sdr,
        };
        ComposedState {
            sdr,
            inner: Clock((me.inner.0 + 1) % self.k),
        }
    }

    fn local_domain(&self, _graph: &Graph, _u: usize) -> Vec<Clock> {
        (0..self.k).map(Clock).collect()
    }

    fn exclusive_rules(&self) -> bool {
        self.mutation == UnisonMutation::None
    }
}
