//! Self-stabilizing distributed reset layered over an input algorithm.
//!
//! Each process carries a status (clean, reset-broadcast, reset-feedback)
//! and a distance. Inconsistencies detected by the input algorithm start a
//! broadcast wave that resets the input state; the wave then folds back and
//! the region returns to clean.

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    ActionError, Algorithm, Encode, RuleId, RuleMask, StepRecord, Trace, View,
};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    /// Clean: the input algorithm may run.
    C,
    /// Reset broadcast in progress.
    RB,
    /// Reset feedback in progress.
    RF,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::C, Status::RB, Status::RF];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SdrState {
    pub st: Status,
    /// Distance to the wave's initiator; never read while `st == C`.
    pub d: u64,
}

impl SdrState {
    pub const CLEAN: SdrState = SdrState { st: Status::C, d: 0 };
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComposedState<S> {
    pub sdr: SdrState,
    pub inner: S,
}

impl<S> ComposedState<S> {
    pub fn clean(inner: S) -> Self {
        ComposedState {
            sdr: SdrState::CLEAN,
            inner,
        }
    }
}

impl Encode for SdrState {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.st as u8);
        out.extend_from_slice(&self.d.to_le_bytes());
    }
}

impl<S: Encode> Encode for ComposedState<S> {
    fn encode(&self, out: &mut Vec<u8>) {
        self.sdr.encode(out);
        self.inner.encode(out);
    }
}

/// Projection of a composed view onto the input algorithm's variables.
/// Local-consistency checks receive only this, so they cannot read the
/// reset layer.
pub struct InnerView<'v, 'a, S> {
    view: &'v View<'a, ComposedState<S>>,
}

impl<'v, 'a, S> InnerView<'v, 'a, S> {
    pub fn new(view: &'v View<'a, ComposedState<S>>) -> Self {
        InnerView { view }
    }

    pub fn own(&self) -> &'a S {
        &self.view.own().inner
    }

    pub fn neighbors(&self) -> impl Iterator<Item = &'a S> + 'a {
        self.view.neighbors().map(|s| &s.inner)
    }

    pub fn me(&self) -> Option<usize> {
        self.view.me()
    }

    pub fn identified_neighbors(&self) -> impl Iterator<Item = (usize, &'a S)> + 'a {
        self.view.identified_neighbors().map(|(v, s)| (v, &s.inner))
    }

    pub fn state_of(&self, v: usize) -> Option<&'a S> {
        self.view.state_of(v).map(|s| &s.inner)
    }
}

/// Contract an algorithm must meet to be composed with the reset layer.
///
/// - its rules never write the reset variables;
/// - `p_icorrect` reads only input variables and is closed by its own steps;
/// - `p_reset` reads only the process's own input variables;
/// - no rule is enabled unless `p_icorrect` and the closed neighborhood is clean;
/// - `p_reset` holding on a whole closed neighborhood implies `p_icorrect`;
/// - `p_reset(reset(s))` always holds.
///
/// [`monitor_requirements`] checks the runtime-observable parts on traces.
pub trait InputAlgorithm {
    type State: Clone + Eq + Hash + Debug + Serialize + Encode;

    fn name(&self) -> &'static str;

    fn rules(&self) -> &'static [&'static str];

    fn identified(&self) -> bool;

    fn p_icorrect(&self, view: &InnerView<'_, '_, Self::State>) -> bool;

    fn p_reset(&self, own: &Self::State) -> bool;

    fn reset(&self, own: &Self::State) -> Self::State;

    /// Enabled input rules (local catalog indices). Guards may read the
    /// reset status through [`p_clean`].
    fn enabled_rules(&self, view: &View<'_, ComposedState<Self::State>>) -> RuleMask;

    /// Whole composed state after the rule, so that illegal writes to the
    /// reset variables stay observable.
    fn apply(
        &self,
        rule: RuleId,
        view: &View<'_, ComposedState<Self::State>>,
    ) -> ComposedState<Self::State>;

    /// Finite set of input states process `u` may hold, for exhaustive search.
    fn local_domain(&self, graph: &Graph, u: usize) -> Vec<Self::State>;

    fn exclusive_rules(&self) -> bool {
        true
    }
}

/// Every process in the closed neighborhood is clean.
pub fn p_clean<S>(view: &View<'_, ComposedState<S>>) -> bool {
    view.closed().all(|s| s.sdr.st == Status::C)
}

/// Reset-layer predicates of one process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SdrPredicates {
    pub p_icorrect: bool,
    pub p_reset: bool,
    pub p_clean: bool,
    pub p_correct: bool,
    pub p_r1: bool,
    pub p_rb: bool,
    pub p_rf: bool,
    pub p_c: bool,
    pub p_r2: bool,
    pub p_up: bool,
    pub p_root: bool,
}

/// Deliberate faults in the reset layer, for negative-control tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdrMutation {
    #[default]
    None,
    /// `rule_RB` joins the broadcast without resetting the input state.
    RbSkipsReset,
    /// `rule_C` ignores the neighbors' distances.
    WeakRuleC,
    /// `rule_RF` ignores the neighborhood entirely.
    WeakRuleRf,
}

fn predicates<I: InputAlgorithm>(
    inner: &I,
    mutation: SdrMutation,
    view: &View<'_, ComposedState<I::State>>,
) -> SdrPredicates {
    let me = view.own();
    let st = me.sdr.st;
    let d = me.sdr.d;
    let p_icorrect = inner.p_icorrect(&InnerView::new(view));
    let p_reset = inner.p_reset(&me.inner);
    let p_clean = p_clean(view);
    let p_correct = st != Status::C || p_icorrect;
    let any_nbr = |f: &dyn Fn(&ComposedState<I::State>) -> bool| view.neighbors().any(f);
    let p_r1 = st == Status::C && !p_reset && any_nbr(&|v| v.sdr.st == Status::RF);
    let p_rb = st == Status::C && any_nbr(&|v| v.sdr.st == Status::RB);
    let p_rf = st == Status::RB
        && p_reset
        && (mutation == SdrMutation::WeakRuleRf
            || view.neighbors().all(|v| {
                (v.sdr.st == Status::RB && v.sdr.d <= d)
                    || (v.sdr.st == Status::RF && inner.p_reset(&v.inner))
            }));
    let p_c = st == Status::RF
        && view.closed().all(|v| {
            inner.p_reset(&v.inner)
                && ((v.sdr.st == Status::RF
                    && (mutation == SdrMutation::WeakRuleC || v.sdr.d >= d))
                    || v.sdr.st == Status::C)
        });
    let p_r2 = st != Status::C && !p_reset;
    let p_up = !p_rb && (p_r1 || p_r2 || !p_correct);
    let p_root = st == Status::RB
        && view
            .neighbors()
            .all(|v| v.sdr.st != Status::RB || v.sdr.d >= d);
    SdrPredicates {
        p_icorrect,
        p_reset,
        p_clean,
        p_correct,
        p_r1,
        p_rb,
        p_rf,
        p_c,
        p_r2,
        p_up,
        p_root,
    }
}

/// Evaluates every reset-layer predicate at the view's process.
pub fn sdr_predicates<I: InputAlgorithm>(
    inner: &I,
    view: &View<'_, ComposedState<I::State>>,
) -> SdrPredicates {
    predicates(inner, SdrMutation::None, view)
}

pub const RULE_RB: RuleId = RuleId(0);
pub const RULE_RF: RuleId = RuleId(1);
pub const RULE_C: RuleId = RuleId(2);
pub const RULE_R: RuleId = RuleId(3);
/// Catalog index of the first input rule in a composition.
pub const INNER_OFFSET: u16 = 4;

const SDR_RULES: [&str; 4] = ["rule_RB", "rule_RF", "rule_C", "rule_R"];
/// Execution priority when a faulty composition enables several rules.
const PRIORITY: [RuleId; 4] = [RULE_C, RULE_RB, RULE_RF, RULE_R];

pub fn is_sdr_rule(rule: RuleId) -> bool {
    rule.0 < INNER_OFFSET
}

/// The composition `I ∘ SDR`.
#[derive(Debug, Clone)]
pub struct Sdr<I> {
    inner: I,
    mutation: SdrMutation,
    rules: Vec<&'static str>,
    name: String,
}

impl<I: InputAlgorithm> Sdr<I> {
    pub fn new(inner: I) -> Self {
        Self::with_mutation(inner, SdrMutation::None)
    }

    pub fn with_mutation(inner: I, mutation: SdrMutation) -> Self {
        let mut rules = SDR_RULES.to_vec();
        rules.extend_from_slice(inner.rules());
        let name = format!("{}_sdr", inner.name());
        Sdr {
            inner,
            mutation,
            rules,
            name,
        }
    }

    pub fn inner(&self) -> &I {
        &self.inner
    }

    pub fn mutation(&self) -> SdrMutation {
        self.mutation
    }

    pub fn predicates(&self, view: &View<'_, ComposedState<I::State>>) -> SdrPredicates {
        predicates(&self.inner, self.mutation, view)
    }

    pub fn predicates_all(
        &self,
        graph: &Graph,
        config: &[ComposedState<I::State>],
    ) -> Vec<SdrPredicates> {
        (0..config.len())
            .map(|u| self.predicates(&self.view(graph, config, u)))
            .collect()
    }

    /// Every process clean and locally consistent.
    pub fn is_normal(&self, graph: &Graph, config: &[ComposedState<I::State>]) -> bool {
        is_normal(&self.inner, graph, config)
    }
}

impl<I: InputAlgorithm> Algorithm for Sdr<I> {
    type State = ComposedState<I::State>;

    fn name(&self) -> &str {
        &self.name
    }

    fn rules(&self) -> &[&'static str] {
        &self.rules
    }

    fn identified(&self) -> bool {
        self.inner.identified()
    }

    fn enabled_rules(&self, view: &View<'_, Self::State>) -> RuleMask {
        let p = self.predicates(view);
        RuleMask::EMPTY
            .with(RULE_RB, p.p_rb)
            .with(RULE_RF, p.p_rf)
            .with(RULE_C, p.p_c)
            .with(RULE_R, p.p_up)
            .union(self.inner.enabled_rules(view).shifted(INNER_OFFSET))
    }

    fn apply(&self, rule: RuleId, view: &View<'_, Self::State>) -> Result<Self::State, ActionError> {
        let me = view.own();
        let reset = || self.inner.reset(&me.inner);
        Ok(match rule {
            RULE_RB => {
                let min_d = view
                    .neighbors()
                    .filter(|v| v.sdr.st == Status::RB)
                    .map(|v| v.sdr.d)
                    .min()
                    .unwrap_or(0);
                let d = min_d.checked_add(1).ok_or(ActionError::DistanceOverflow)?;
                let inner = if self.mutation == SdrMutation::RbSkipsReset {
                    me.inner.clone()
                } else {
                    reset()
                };
                ComposedState {
                    sdr: SdrState { st: Status::RB, d },
                    inner,
                }
            }
            RULE_RF => ComposedState {
                sdr: SdrState {
                    st: Status::RF,
                    d: me.sdr.d,
                },
                inner: me.inner.clone(),
            },
            RULE_C => ComposedState {
                sdr: SdrState {
                    st: Status::C,
                    d: me.sdr.d,
                },
                inner: me.inner.clone(),
            },
            RULE_R => ComposedState {
                sdr: SdrState { st: Status::RB, d: 0 },
                inner: reset(),
            },
            RuleId(r) => self.inner.apply(RuleId(r - INNER_OFFSET), view),
        })
    }

    fn choose_rule(&self, enabled: RuleMask) -> Option<RuleId> {
        PRIORITY
            .into_iter()
            .find(|&r| enabled.contains(r))
            .or_else(|| enabled.lowest())
    }

    fn exclusive_rules(&self) -> bool {
        self.mutation == SdrMutation::None && self.inner.exclusive_rules()
    }
}

/// The input algorithm alone, reset variables frozen at whatever they hold.
#[derive(Debug, Clone)]
pub struct Standalone<I>(pub I);

impl<I: InputAlgorithm> Algorithm for Standalone<I> {
    type State = ComposedState<I::State>;

    fn name(&self) -> &str {
        self.0.name()
    }

    fn rules(&self) -> &[&'static str] {
        self.0.rules()
    }

    fn identified(&self) -> bool {
        self.0.identified()
    }

    fn enabled_rules(&self, view: &View<'_, Self::State>) -> RuleMask {
        self.0.enabled_rules(view)
    }

    fn apply(&self, rule: RuleId, view: &View<'_, Self::State>) -> Result<Self::State, ActionError> {
        Ok(self.0.apply(rule, view))
    }

    fn exclusive_rules(&self) -> bool {
        self.0.exclusive_rules()
    }
}

/// Every process clean and locally consistent.
pub fn is_normal<I: InputAlgorithm>(
    inner: &I,
    graph: &Graph,
    config: &[ComposedState<I::State>],
) -> bool {
    (0..config.len()).all(|u| {
        let view = View::new(u, config, graph, inner.identified());
        p_clean(&view) && inner.p_icorrect(&InnerView::new(&view))
    })
}

/// Uniform status and distance in `0..=max_d`.
pub fn random_sdr_state<R: Rng + ?Sized>(rng: &mut R, max_d: u64) -> SdrState {
    SdrState {
        st: Status::ALL[rng.random_range(0..3)],
        d: rng.random_range(0..=max_d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    /// An input rule changed a reset variable.
    InputWritesResetVars,
    /// Local consistency was lost across a step with only input moves around.
    ConsistencyNotClosed,
    /// An input rule was enabled at an inconsistent or unclean process.
    EnabledWhileUnsafe,
    /// A resetting move left the process outside the reset predicate.
    ResetNotReached,
    /// A fully reset closed neighborhood was not locally consistent.
    ResetNotConsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequirementViolation {
    pub requirement: Requirement,
    /// Configuration index (for state checks) or step index (for step checks).
    pub at: usize,
    pub process: usize,
}

/// Checks the composition contract along a trace of `I ∘ SDR`.
pub fn monitor_requirements<I: InputAlgorithm>(
    sdr: &Sdr<I>,
    graph: &Graph,
    trace: &Trace<ComposedState<I::State>>,
) -> Vec<RequirementViolation> {
    let inner = sdr.inner();
    let mut out = Vec::new();
    let mut push = |requirement, at, process| {
        out.push(RequirementViolation {
            requirement,
            at,
            process,
        })
    };
    let n = graph.n();
    let icorrect = |config: &[ComposedState<I::State>], u: usize| {
        inner.p_icorrect(&InnerView::new(&View::new(u, config, graph, inner.identified())))
    };
    let mut icorrect_cache: Vec<Vec<bool>> = Vec::with_capacity(trace.configs.len());
    for (i, config) in trace.configs.iter().enumerate() {
        let ic: Vec<bool> = (0..n).map(|u| icorrect(config, u)).collect();
        for (u, &ok) in ic.iter().enumerate() {
            let view = View::new(u, config.as_slice(), graph, inner.identified());
            if (!ok || !p_clean(&view)) && !inner.enabled_rules(&view).is_empty() {
                push(Requirement::EnabledWhileUnsafe, i, u);
            }
            let all_reset = view.closed().all(|s| inner.p_reset(&s.inner));
            if all_reset && !ok {
                push(Requirement::ResetNotConsistent, i, u);
            }
        }
        icorrect_cache.push(ic);
    }
    for (i, (pre, step, post)) in trace.transitions().enumerate() {
        for (u, rule) in step.moves() {
            if !is_sdr_rule(rule) && pre[u].sdr != post[u].sdr {
                push(Requirement::InputWritesResetVars, i, u);
            }
            if (rule == RULE_RB || rule == RULE_R) && !inner.p_reset(&post[u].inner)
            {
                push(Requirement::ResetNotReached, i, u);
            }
        }
        let (before, after) = (&icorrect_cache[i], &icorrect_cache[i + 1]);
        for u in 0..n {
            if before[u] && !after[u]
                && only_input_moves_around(graph, step, u)
            {
                push(Requirement::ConsistencyNotClosed, i, u);
            }
        }
    }
    out
}

fn only_input_moves_around(graph: &Graph, step: &StepRecord, u: usize) -> bool {
    std::iter::once(u)
        .chain(graph.neighbors(u).iter().copied())
        .all(|v| step.rule_of(v).is_none_or(|r| !is_sdr_rule(r)))
}
