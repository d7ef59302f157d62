//! 1-minimal (f,g)-alliance in identified networks.
//!
//! Every process starts inside the alliance. A member may leave once all
//! its neighbors report a surplus and the whole closed neighborhood points
//! at it; pointers pick the smallest-id candidate so that removals are
//! locally serialized.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Encode, RuleId, RuleMask, View};
use crate::graph::Graph;
use crate::sdr::{p_clean, random_sdr_state, ComposedState, InnerView, InputAlgorithm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AllianceState {
    /// Member of the alliance.
    pub col: bool,
    /// Cached score in {-1, 0, 1}: deficit, exact, surplus.
    pub scr: i8,
    /// Cached "may leave" flag.
    pub can_q: bool,
    /// Candidate pointer into the closed neighborhood, `None` for ⊥.
    pub ptr: Option<u32>,
}

impl AllianceState {
    /// The state `reset` installs (and the initial state).
    pub const RESET: AllianceState = AllianceState {
        col: true,
        scr: 1,
        can_q: true,
        ptr: None,
    };
}

impl Encode for AllianceState {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.col as u8);
        out.push(self.scr as u8);
        out.push(self.can_q as u8);
        match self.ptr {
            None => out.push(0),
            Some(p) => {
                out.push(1);
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AllianceError {
    #[error("expected {expected} values for `{what}`, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("process {process} has degree {degree} < max(f, g) = {needed}")]
    DegreeTooSmall {
        process: usize,
        degree: usize,
        needed: u32,
    },
    #[error("identifier {0} is used twice")]
    DuplicateId(u64),
    #[error("the given set is not an (f,g)-alliance")]
    NotAnAlliance,
}

/// Named (f, g) families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// f ≡ 1, g ≡ 0.
    DominatingSet,
    /// f ≡ k, g ≡ 0.
    KDomination(u32),
    /// f ≡ k, g ≡ k − 1.
    KTupleDomination(u32),
    /// f = ⌈(δ+1)/2⌉, g ≡ 0.
    GlobalOffensive,
    /// f ≡ 1, g = ⌈(δ+1)/2⌉.
    GlobalDefensive,
    /// f = ⌈(δ+1)/2⌉, g = ⌈δ/2⌉.
    GlobalPowerful,
}

impl Preset {
    /// Per-process (f, g) on `graph`.
    pub fn values(self, graph: &Graph) -> (Vec<u32>, Vec<u32>) {
        let n = graph.n();
        let deg = |u: usize| graph.degree(u) as u32;
        match self {
            Preset::DominatingSet => (vec![1; n], vec![0; n]),
            Preset::KDomination(k) => (vec![k; n], vec![0; n]),
            Preset::KTupleDomination(k) => (vec![k; n], vec![k.saturating_sub(1); n]),
            Preset::GlobalOffensive => ((0..n).map(|u| (deg(u) + 2) / 2).collect(), vec![0; n]),
            Preset::GlobalDefensive => (vec![1; n], (0..n).map(|u| (deg(u) + 2) / 2).collect()),
            Preset::GlobalPowerful => (
                (0..n).map(|u| (deg(u) + 2) / 2).collect(),
                (0..n).map(|u| deg(u).div_ceil(2)).collect(),
            ),
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        let s = s.trim();
        let with_k = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.trim().parse::<u32>().ok())
        };
        match s {
            "dominating_set" => Some(Preset::DominatingSet),
            "global_offensive" => Some(Preset::GlobalOffensive),
            "global_defensive" => Some(Preset::GlobalDefensive),
            "global_powerful" => Some(Preset::GlobalPowerful),
            _ => with_k("k_domination(")
                .map(Preset::KDomination)
                .or_else(|| with_k("k_tuple_domination(").map(Preset::KTupleDomination)),
        }
    }
}

/// Per-process thresholds and identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgParams {
    pub f: Vec<u32>,
    pub g: Vec<u32>,
    pub ids: Vec<u64>,
}

impl FgParams {
    /// Validates lengths, `δ_u ≥ max(f(u), g(u))` and distinct ids.
    pub fn new(graph: &Graph, f: Vec<u32>, g: Vec<u32>, ids: Vec<u64>) -> Result<Self, AllianceError> {
        let n = graph.n();
        for (what, got) in [("f", f.len()), ("g", g.len()), ("ids", ids.len())] {
            if got != n {
                return Err(AllianceError::Length {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        for u in 0..n {
            let needed = f[u].max(g[u]);
            if (graph.degree(u) as u32) < needed {
                return Err(AllianceError::DegreeTooSmall {
                    process: u,
                    degree: graph.degree(u),
                    needed,
                });
            }
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(AllianceError::DuplicateId(w[0]));
        }
        Ok(FgParams { f, g, ids })
    }

    /// Preset thresholds with ids equal to process indices.
    pub fn preset(graph: &Graph, preset: Preset) -> Result<Self, AllianceError> {
        let (f, g) = preset.values(graph);
        Self::new(graph, f, g, (0..graph.n() as u64).collect())
    }
}

/// Deliberate faults, for negative-control tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgaMutation {
    #[default]
    None,
    /// `rule_Q` keeps the pointer when the score drops to 0 or below.
    QKeepsPtr,
}

pub const RULE_CLR: RuleId = RuleId(0);
pub const RULE_P1: RuleId = RuleId(1);
pub const RULE_P2: RuleId = RuleId(2);
pub const RULE_Q: RuleId = RuleId(3);

type CView<'a> = View<'a, ComposedState<AllianceState>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fga {
    params: FgParams,
    mutation: FgaMutation,
}

impl Fga {
    pub fn new(params: FgParams) -> Self {
        Fga {
            params,
            mutation: FgaMutation::None,
        }
    }

    pub fn with_mutation(mut self, mutation: FgaMutation) -> Self {
        self.mutation = mutation;
        self
    }

    pub fn params(&self) -> &FgParams {
        &self.params
    }

    fn me(view: &CView<'_>) -> usize {
        view.me().expect("alliance views are identified")
    }

    /// Number of neighbors inside the alliance.
    pub fn in_all(view: &CView<'_>) -> usize {
        view.neighbors().filter(|s| s.inner.col).count()
    }

    /// Score of `own` against the actual neighborhood.
    fn real_scr_of(&self, own: &AllianceState, view: &CView<'_>) -> i8 {
        let u = Self::me(view);
        let threshold = if own.col { self.params.g[u] } else { self.params.f[u] } as usize;
        match Self::in_all(view).cmp(&threshold) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        }
    }

    pub fn real_scr(&self, view: &CView<'_>) -> i8 {
        self.real_scr_of(&view.own().inner, view)
    }

    fn can_quit_of(&self, own: &AllianceState, view: &CView<'_>) -> bool {
        own.col
            && Self::in_all(view) >= self.params.f[Self::me(view)] as usize
            && view.neighbors().all(|s| s.inner.scr == 1)
    }

    pub fn can_quit(&self, view: &CView<'_>) -> bool {
        self.can_quit_of(&view.own().inner, view)
    }

    /// `can_quit` and every pointer in the closed neighborhood names this process.
    pub fn to_quit(&self, view: &CView<'_>) -> bool {
        let u = Self::me(view) as u32;
        self.can_quit(view) && view.closed().all(|s| s.inner.ptr == Some(u))
    }

    /// Smallest-id process of the closed neighborhood with `can_q`, judged
    /// with `own` standing in for the process's own state.
    fn best_ptr_of(&self, own: &AllianceState, view: &CView<'_>) -> Option<u32> {
        if own.scr <= 0 {
            return None;
        }
        let u = Self::me(view);
        std::iter::once((u, own))
            .chain(view.identified_neighbors().map(|(v, s)| (v, &s.inner)))
            .filter(|(_, s)| s.can_q)
            .min_by_key(|&(v, _)| self.params.ids[v])
            .map(|(v, _)| v as u32)
    }

    pub fn best_ptr(&self, view: &CView<'_>) -> Option<u32> {
        self.best_ptr_of(&view.own().inner, view)
    }

    pub fn upd_ptr(&self, view: &CView<'_>) -> bool {
        !self.to_quit(view) && view.own().inner.ptr != self.best_ptr(view)
    }

    fn cmp_var(&self, own: &mut AllianceState, view: &CView<'_>) {
        own.scr = self.real_scr_of(own, view);
        own.can_q = self.can_quit_of(own, view);
    }

    fn upd(&self, own: &mut AllianceState, view: &CView<'_>) {
        self.cmp_var(own, view);
        own.ptr = self.best_ptr_of(own, view);
    }

    /// All processes in the initial (reset) state and clean.
    pub fn gamma_init(&self, graph: &Graph) -> Vec<ComposedState<AllianceState>> {
        vec![ComposedState::clean(AllianceState::RESET); graph.n()]
    }

    /// Uniform alliance variables, pointer uniform over `N[u] ∪ {⊥}`,
    /// status uniform and distance uniform in `0..=n`.
    pub fn random_config<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        rng: &mut R,
    ) -> Vec<ComposedState<AllianceState>> {
        (0..graph.n())
            .map(|u| {
                let choices = self.local_domain(graph, u);
                ComposedState {
                    sdr: random_sdr_state(rng, graph.n() as u64),
                    inner: choices[rng.random_range(0..choices.len())],
                }
            })
            .collect()
    }

    /// Level of the alliance attractor ladder: 0 if some process is unclean
    /// or inconsistent, otherwise the largest k in 5..=9 such that every
    /// process satisfies the first k−5 of: cached score exact, cached
    /// `can_q` exact, pointer ∈ {best, ⊥}, pointer = best.
    pub fn ladder_level(&self, graph: &Graph, config: &[ComposedState<AllianceState>]) -> u8 {
        if !crate::sdr::is_normal(self, graph, config) {
            return 0;
        }
        let mut level = 9;
        for u in 0..graph.n() {
            let view = View::new(u, config, graph, true);
            let s = &view.own().inner;
            let best = self.best_ptr(&view);
            let l = if s.scr != self.real_scr(&view) {
                5
            } else if s.can_q != self.can_quit(&view) {
                6
            } else if !(s.ptr.is_none() || s.ptr == best) {
                7
            } else if s.ptr != best {
                8
            } else {
                9
            };
            level = level.min(l);
        }
        level
    }
}

impl InputAlgorithm for Fga {
    type State = AllianceState;

    fn name(&self) -> &'static str {
        "alliance"
    }

    fn rules(&self) -> &'static [&'static str] {
        &["rule_Clr", "rule_P1", "rule_P2", "rule_Q"]
    }

    fn identified(&self) -> bool {
        true
    }

    fn p_icorrect(&self, view: &InnerView<'_, '_, AllianceState>) -> bool {
        let u = view.me().expect("alliance views are identified");
        let own = view.own();
        let in_all = view.neighbors().filter(|s| s.col).count();
        let threshold = if own.col { self.params.g[u] } else { self.params.f[u] } as usize;
        let real = match in_all.cmp(&threshold) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        };
        let ptr_out = own
            .ptr
            .and_then(|p| view.state_of(p as usize))
            .is_some_and(|s| !s.col);
        real >= 0
            && ((own.scr == 1 && real == 1)
                || own.ptr.is_none()
                || (own.ptr.is_some() && own.scr == 1 && ptr_out))
    }

    fn p_reset(&self, own: &AllianceState) -> bool {
        *own == AllianceState::RESET
    }

    fn reset(&self, _own: &AllianceState) -> AllianceState {
        AllianceState::RESET
    }

    fn enabled_rules(&self, view: &View<'_, ComposedState<AllianceState>>) -> RuleMask {
        if !p_clean(view) || !self.p_icorrect(&InnerView::new(view)) {
            return RuleMask::EMPTY;
        }
        let own = &view.own().inner;
        let to_quit = self.to_quit(view);
        let upd_ptr = !to_quit && own.ptr != self.best_ptr(view);
        let stale = own.scr != self.real_scr(view) || own.can_q != self.can_quit(view);
        RuleMask::EMPTY
            .with(RULE_CLR, to_quit)
            .with(RULE_P1, upd_ptr && own.ptr.is_some())
            .with(RULE_P2, upd_ptr && own.ptr.is_none())
            .with(RULE_Q, !to_quit && !upd_ptr && stale)
    }

    fn apply(
        &self,
        rule: RuleId,
        view: &View<'_, ComposedState<AllianceState>>,
    ) -> ComposedState<AllianceState> {
        let mut own = view.own().inner;
        match rule {
            RULE_CLR => {
                own.col = false;
                self.upd(&mut own, view);
            }
            RULE_P1 => {
                own.ptr = None;
                self.cmp_var(&mut own, view);
            }
            RULE_P2 => self.upd(&mut own, view),
            _ => {
                self.cmp_var(&mut own, view);
                if self.mutation != FgaMutation::QKeepsPtr && self.real_scr_of(&own, view) <= 0 {
                    own.ptr = None;
                }
            }
        }
        ComposedState {
            sdr: view.own().sdr,
            inner: own,
        }
    }

    /// Every combination of the alliance variables with the pointer ranging
    /// over `N[u] ∪ {⊥}`.
    fn local_domain(&self, graph: &Graph, u: usize) -> Vec<AllianceState> {
        let ptrs: Vec<Option<u32>> = std::iter::once(None)
            .chain(std::iter::once(Some(u as u32)))
            .chain(graph.neighbors(u).iter().map(|&v| Some(v as u32)))
            .collect();
        let mut out = Vec::with_capacity(12 * ptrs.len());
        for col in [true, false] {
            for scr in [-1i8, 0, 1] {
                for can_q in [true, false] {
                    for &ptr in &ptrs {
                        out.push(AllianceState {
                            col,
                            scr,
                            can_q,
                            ptr,
                        });
                    }
                }
            }
        }
        out
    }

    fn exclusive_rules(&self) -> bool {
        self.mutation == FgaMutation::None
    }
}

/// Every outsider has ≥ f neighbors inside, every member ≥ g.
pub fn is_fg_alliance(members: &[bool], graph: &Graph, params: &FgParams) -> bool {
    (0..graph.n()).all(|u| {
        let inside = graph.neighbors(u).iter().filter(|&&v| members[v]).count();
        let need = if members[u] { params.g[u] } else { params.f[u] } as usize;
        inside >= need
    })
}

/// Removing any single member breaks the alliance.
pub fn is_1_minimal(members: &[bool], graph: &Graph, params: &FgParams) -> Result<bool, AllianceError> {
    if !is_fg_alliance(members, graph, params) {
        return Err(AllianceError::NotAnAlliance);
    }
    let mut probe = members.to_vec();
    for u in 0..graph.n() {
        if members[u] {
            probe[u] = false;
            let still = is_fg_alliance(&probe, graph, params);
            probe[u] = true;
            if still {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// No proper subset is an alliance. Exponential; for small n only.
pub fn is_minimal(members: &[bool], graph: &Graph, params: &FgParams) -> Result<bool, AllianceError> {
    if !is_fg_alliance(members, graph, params) {
        return Err(AllianceError::NotAnAlliance);
    }
    let inside: Vec<usize> = (0..graph.n()).filter(|&u| members[u]).collect();
    assert!(inside.len() < 24, "brute-force minimality is limited to small sets");
    let full = (1u32 << inside.len()) - 1;
    let mut probe = vec![false; graph.n()];
    for mask in 0..full {
        for (i, &u) in inside.iter().enumerate() {
            probe[u] = mask & (1 << i) != 0;
        }
        if is_fg_alliance(&probe, graph, params) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Members of the alliance encoded in a configuration.
pub fn members(config: &[ComposedState<AllianceState>]) -> Vec<bool> {
    config.iter().map(|s| s.inner.col).collect()
}
