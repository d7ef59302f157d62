//! Exhaustive exploration of tiny instances under the unfair distributed
//! daemon: every nonempty subset of enabled processes is a transition.
//!
//! Configurations are indexed densely in mixed radix over per-process
//! local domains, so visited sets are flat byte arrays.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{Algorithm, RuleId, View};
use crate::graph::Graph;
use crate::sdr::{ComposedState, InputAlgorithm, SdrState, Status};

/// Hard cap on the dense index space (bytes of colour storage).
pub const MAX_INDEX_SPACE: u64 = 1 << 33;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("index space of {0} configurations exceeds the explorer's limit")]
    TooLarge(u64),
    #[error("budget of {budget} reachable configurations exhausted")]
    BudgetExhausted { budget: u64 },
}

/// Canonicalises a local state before lookup.
pub type Normalizer<'a, S> = Box<dyn Fn(&S) -> S + 'a>;

/// A configuration predicate.
pub type ConfigPred<'f, S> = Box<dyn Fn(&[S]) -> bool + 'f>;

/// Stem and cycle of a non-terminating execution.
type Lasso<S> = (Vec<Vec<S>>, Vec<Vec<S>>);

/// A finite per-process state space with a dense configuration index.
pub struct StateSpace<'a, A: Algorithm> {
    alg: &'a A,
    graph: &'a Graph,
    locals: Vec<Vec<A::State>>,
    lookup: Vec<HashMap<A::State, u32>>,
    init_ok: Vec<Vec<bool>>,
    stride: Vec<u64>,
    size: u64,
    normalize: Normalizer<'a, A::State>,
}

/// Outgoing moves of one configuration: for each enabled process, the
/// index deltas of its possible moves (one per enabled rule).
#[derive(Debug, Clone)]
pub struct Expansion<S> {
    pub config: Vec<S>,
    pub options: Vec<(usize, Vec<i64>)>,
}

/// A local state produced by an action fell outside the process's domain.
#[derive(Debug, Clone)]
pub struct OutOfDomain<S> {
    pub config: Vec<S>,
    pub process: usize,
    pub rule: RuleId,
}

impl<'a, A: Algorithm> StateSpace<'a, A> {
    /// `locals[u]` lists process `u`'s states; `init_ok[u][i]` marks those
    /// allowed initially. Every produced state is passed through
    /// `normalize` before lookup.
    pub fn new(
        alg: &'a A,
        graph: &'a Graph,
        locals: Vec<Vec<A::State>>,
        init_ok: Vec<Vec<bool>>,
        normalize: Normalizer<'a, A::State>,
    ) -> Result<Self, ExploreError> {
        let mut stride = Vec::with_capacity(locals.len());
        let mut size: u64 = 1;
        for l in &locals {
            stride.push(size);
            size = size
                .checked_mul(l.len() as u64)
                .filter(|&s| s <= MAX_INDEX_SPACE)
                .ok_or(ExploreError::TooLarge(u64::MAX))?;
        }
        let lookup = locals
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect())
            .collect();
        Ok(StateSpace {
            alg,
            graph,
            locals,
            lookup,
            init_ok,
            stride,
            size,
            normalize,
        })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn local_sizes(&self) -> Vec<usize> {
        self.locals.iter().map(Vec::len).collect()
    }

    pub fn decode(&self, idx: u64) -> Vec<A::State> {
        self.locals
            .iter()
            .zip(&self.stride)
            .map(|(l, &s)| l[((idx / s) % l.len() as u64) as usize].clone())
            .collect()
    }

    /// Index of a configuration, or the first process whose (normalized)
    /// state lies outside its domain.
    pub fn encode(&self, config: &[A::State]) -> Result<u64, usize> {
        let mut idx = 0;
        for (u, s) in config.iter().enumerate() {
            let i = self.lookup[u].get(&(self.normalize)(s)).ok_or(u)?;
            idx += *i as u64 * self.stride[u];
        }
        Ok(idx)
    }

    fn local_index(&self, idx: u64, u: usize) -> u64 {
        (idx / self.stride[u]) % self.locals[u].len() as u64
    }

    pub fn expand(&self, idx: u64) -> Result<Expansion<A::State>, OutOfDomain<A::State>> {
        let config = self.decode(idx);
        let mut options = Vec::new();
        for u in 0..config.len() {
            let view = View::new(u, &config, self.graph, self.alg.identified());
            let mask = self.alg.enabled_rules(&view);
            if mask.is_empty() {
                continue;
            }
            let rules: Vec<RuleId> = if self.alg.exclusive_rules() {
                self.alg.choose_rule(mask).into_iter().collect()
            } else {
                mask.iter().collect()
            };
            let old = self.local_index(idx, u) as i64;
            let mut deltas = Vec::with_capacity(rules.len());
            for rule in rules {
                let next = self
                    .alg
                    .apply(rule, &view)
                    .ok()
                    .map(|s| (self.normalize)(&s))
                    .and_then(|s| self.lookup[u].get(&s).copied());
                let Some(new) = next else {
                    return Err(OutOfDomain {
                        config,
                        process: u,
                        rule,
                    });
                };
                deltas.push((new as i64 - old) * self.stride[u] as i64);
            }
            options.push((u, deltas));
        }
        Ok(Expansion { config, options })
    }

    /// Every successor index; moves by `exclude` are left out.
    pub fn successors(&self, idx: u64, exp: &Expansion<A::State>, exclude: Option<usize>) -> Vec<u64> {
        let opts: Vec<&Vec<i64>> = exp
            .options
            .iter()
            .filter(|(u, _)| Some(*u) != exclude)
            .map(|(_, d)| d)
            .collect();
        let mut out = Vec::new();
        // Odometer over (not activated | option j) per process.
        let mut digit = vec![0usize; opts.len()];
        loop {
            let mut i = 0;
            while i < opts.len() {
                digit[i] += 1;
                if digit[i] <= opts[i].len() {
                    break;
                }
                digit[i] = 0;
                i += 1;
            }
            if i == opts.len() {
                break;
            }
            let delta: i64 = digit
                .iter()
                .zip(&opts)
                .filter(|(&d, _)| d > 0)
                .map(|(&d, o)| o[d - 1])
                .sum();
            out.push((idx as i64 + delta) as u64);
        }
        out
    }

    /// All initial indices, in increasing order.
    fn for_each_init(&self, mut f: impl FnMut(u64) -> bool) {
        let allowed: Vec<Vec<u64>> = self
            .init_ok
            .iter()
            .zip(&self.stride)
            .map(|(ok, &s)| {
                ok.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| i as u64 * s)
                    .collect()
            })
            .collect();
        if allowed.iter().any(Vec::is_empty) {
            return;
        }
        let mut digit = vec![0usize; allowed.len()];
        loop {
            let idx: u64 = digit.iter().zip(&allowed).map(|(&d, a)| a[d]).sum();
            if !f(idx) {
                return;
            }
            let mut i = 0;
            while i < digit.len() {
                digit[i] += 1;
                if digit[i] < allowed[i].len() {
                    break;
                }
                digit[i] = 0;
                i += 1;
            }
            if i == digit.len() {
                return;
            }
        }
    }
}

/// What the exploration must establish.
pub enum Goal<'f, S> {
    /// Every execution reaches `target`, `target` is closed, no execution
    /// stops inside it, and no process can be starved forever inside it.
    Convergence {
        target: ConfigPred<'f, S>,
    },
    /// No cycle anywhere; every terminal configuration satisfies `terminal_ok`.
    Silence {
        terminal_ok: ConfigPred<'f, S>,
    },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample<S> {
    /// A terminal configuration that must not be terminal.
    Terminal { config: Vec<S> },
    /// A reachable cycle that must not exist (`stem` leads to `cycle[0]`).
    Lasso { stem: Vec<Vec<S>>, cycle: Vec<Vec<S>> },
    /// A step leaving the target set.
    ClosureBreak { from: Vec<S>, to: Vec<S> },
    /// A cycle inside the target set on which `process` never moves.
    Starvation {
        process: usize,
        cycle: Vec<Vec<S>>,
    },
    /// An action produced a state outside the explored domain.
    OutOfDomain {
        config: Vec<S>,
        process: usize,
        rule: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplorationResult<S> {
    pub index_space: u64,
    pub initial: u64,
    pub reachable: u64,
    pub terminals: u64,
    pub target_states: u64,
    pub certified: bool,
    pub counterexample: Option<Counterexample<S>>,
    /// Largest value of the caller's measure over visited configurations.
    pub max_measure: u64,
}

const VISITED: u8 = 1;
const TARGET: u8 = 2;
const GRAY: u8 = 4;
const BLACK: u8 = 8;

struct Frame {
    idx: u64,
    succs: Vec<u64>,
    next: usize,
}

/// Explores from every initial configuration of `space`.
pub fn explore<A: Algorithm>(
    space: &StateSpace<'_, A>,
    goal: &Goal<'_, A::State>,
    budget: u64,
    measure: &dyn Fn(&A::State) -> u64,
) -> Result<ExplorationResult<A::State>, ExploreError> {
    let mut ex = Explorer {
        space,
        colors: vec![0u8; space.size as usize],
        result: ExplorationResult {
            index_space: space.size,
            initial: 0,
            reachable: 0,
            terminals: 0,
            target_states: 0,
            certified: false,
            counterexample: None,
            max_measure: 0,
        },
        budget,
        measure,
    };
    match goal {
        Goal::Silence { terminal_ok } => ex.silence(terminal_ok.as_ref())?,
        Goal::Convergence { target } => ex.convergence(target.as_ref())?,
    }
    ex.result.certified = ex.result.counterexample.is_none();
    Ok(ex.result)
}

struct Explorer<'s, 'a, A: Algorithm> {
    space: &'s StateSpace<'a, A>,
    colors: Vec<u8>,
    result: ExplorationResult<A::State>,
    budget: u64,
    measure: &'s dyn Fn(&A::State) -> u64,
}

impl<A: Algorithm> Explorer<'_, '_, A> {
    fn note_visit(&mut self, config: &[A::State]) -> Result<(), ExploreError> {
        self.result.reachable += 1;
        if self.result.reachable > self.budget {
            return Err(ExploreError::BudgetExhausted {
                budget: self.budget,
            });
        }
        for s in config {
            self.result.max_measure = self.result.max_measure.max((self.measure)(s));
        }
        Ok(())
    }

    fn fail(&mut self, c: Counterexample<A::State>) {
        if self.result.counterexample.is_none() {
            self.result.counterexample = Some(c);
        }
    }

    fn out_of_domain(&mut self, e: OutOfDomain<A::State>) {
        let rule = self.space.alg.rule_name(e.rule).to_string();
        self.fail(Counterexample::OutOfDomain {
            config: e.config,
            process: e.process,
            rule,
        });
    }

    /// Stem and cycle of the lasso closed by an edge back to `back_to`.
    fn lasso(&self, stack: &[Frame], back_to: u64) -> Lasso<A::State> {
        let pos = stack
            .iter()
            .position(|f| f.idx == back_to)
            .expect("gray state is on the stack");
        let decode = |f: &Frame| self.space.decode(f.idx);
        (
            stack[..pos].iter().map(decode).collect(),
            stack[pos..].iter().map(decode).collect(),
        )
    }

    /// Acyclicity of the whole reachable graph plus terminal checks, in a
    /// single DFS rooted at each initial configuration in turn.
    fn silence(&mut self, terminal_ok: &dyn Fn(&[A::State]) -> bool) -> Result<(), ExploreError> {
        let space = self.space;
        let mut outcome = Ok(());
        let mut stack: Vec<Frame> = Vec::new();
        space.for_each_init(|root| {
            self.result.initial += 1;
            if self.colors[root as usize] != 0 {
                return true;
            }
            match self.dfs_silent(root, &mut stack, terminal_ok) {
                Ok(go_on) => go_on,
                Err(e) => {
                    outcome = Err(e);
                    false
                }
            }
        });
        outcome
    }

    fn dfs_silent(
        &mut self,
        root: u64,
        stack: &mut Vec<Frame>,
        terminal_ok: &dyn Fn(&[A::State]) -> bool,
    ) -> Result<bool, ExploreError> {
        stack.clear();
        if !self.open(root, stack, terminal_ok)? {
            return Ok(false);
        }
        while let Some(top) = stack.last_mut() {
            if top.next == top.succs.len() {
                self.colors[top.idx as usize] = VISITED | BLACK;
                stack.pop();
                continue;
            }
            let s = top.succs[top.next];
            top.next += 1;
            match self.colors[s as usize] {
                0 => {
                    if !self.open(s, stack, terminal_ok)? {
                        return Ok(false);
                    }
                }
                c if c & GRAY != 0 => {
                    let (stem, cycle) = self.lasso(stack, s);
                    self.fail(Counterexample::Lasso { stem, cycle });
                    return Ok(false);
                }
                _ => {}
            }
        }
        Ok(true)
    }

    /// Marks `idx` gray and pushes it; false once a counterexample is found.
    fn open(
        &mut self,
        idx: u64,
        stack: &mut Vec<Frame>,
        terminal_ok: &dyn Fn(&[A::State]) -> bool,
    ) -> Result<bool, ExploreError> {
        let exp = match self.space.expand(idx) {
            Ok(e) => e,
            Err(e) => {
                self.out_of_domain(e);
                return Ok(false);
            }
        };
        self.note_visit(&exp.config)?;
        self.colors[idx as usize] = VISITED | GRAY;
        let succs = self.space.successors(idx, &exp, None);
        if succs.is_empty() {
            self.result.terminals += 1;
            if !terminal_ok(&exp.config) {
                self.fail(Counterexample::Terminal { config: exp.config });
                return Ok(false);
            }
        }
        stack.push(Frame { idx, succs, next: 0 });
        Ok(true)
    }

    fn convergence(&mut self, target: &dyn Fn(&[A::State]) -> bool) -> Result<(), ExploreError> {
        // Reachability, terminals, closure of the target.
        let mut work = Vec::new();
        self.space.for_each_init(|i| {
            work.push(i);
            true
        });
        self.result.initial = work.len() as u64;
        for &i in &work {
            self.colors[i as usize] = VISITED;
        }
        let mut target_list = Vec::new();
        let mut outside = Vec::new();
        while let Some(idx) = work.pop() {
            let exp = match self.space.expand(idx) {
                Ok(e) => e,
                Err(e) => {
                    self.out_of_domain(e);
                    return Ok(());
                }
            };
            self.note_visit(&exp.config)?;
            let in_target = target(&exp.config);
            let succs = self.space.successors(idx, &exp, None);
            if succs.is_empty() {
                self.result.terminals += 1;
                self.fail(Counterexample::Terminal { config: exp.config });
                return Ok(());
            }
            if in_target {
                self.colors[idx as usize] |= TARGET;
                target_list.push(idx);
                for &s in &succs {
                    let next = self.space.decode(s);
                    if !target(&next) {
                        self.fail(Counterexample::ClosureBreak {
                            from: exp.config,
                            to: next,
                        });
                        return Ok(());
                    }
                }
            } else {
                outside.push(idx);
            }
            for s in succs {
                if self.colors[s as usize] & VISITED == 0 {
                    self.colors[s as usize] |= VISITED;
                    work.push(s);
                }
            }
        }
        self.result.target_states = target_list.len() as u64;

        // No cycle avoiding the target.
        if let Some((stem, cycle)) = self.find_cycle(&outside, |c| c & TARGET == 0, None) {
            self.fail(Counterexample::Lasso { stem, cycle });
            return Ok(());
        }
        // Inside the target, no cycle on which some process never moves.
        for p in 0..self.space.locals.len() {
            if let Some((_, cycle)) = self.find_cycle(&target_list, |c| c & TARGET != 0, Some(p)) {
                self.fail(Counterexample::Starvation { process: p, cycle });
                return Ok(());
            }
        }
        Ok(())
    }

    /// DFS restricted to visited states whose colour passes `keep`,
    /// optionally ignoring moves of one process.
    fn find_cycle(
        &mut self,
        roots: &[u64],
        keep: impl Fn(u8) -> bool,
        exclude: Option<usize>,
    ) -> Option<Lasso<A::State>> {
        for &i in roots {
            self.colors[i as usize] &= !(GRAY | BLACK);
        }
        let mut stack: Vec<Frame> = Vec::new();
        for &root in roots {
            if self.colors[root as usize] & (GRAY | BLACK) != 0 {
                continue;
            }
            self.push_restricted(root, &mut stack, &keep, exclude);
            while let Some(top) = stack.last_mut() {
                if top.next == top.succs.len() {
                    let c = &mut self.colors[top.idx as usize];
                    *c = (*c & !GRAY) | BLACK;
                    stack.pop();
                    continue;
                }
                let s = top.succs[top.next];
                top.next += 1;
                let c = self.colors[s as usize];
                if c & GRAY != 0 {
                    return Some(self.lasso(&stack, s));
                }
                if c & BLACK == 0 {
                    self.push_restricted(s, &mut stack, &keep, exclude);
                }
            }
        }
        None
    }

    fn push_restricted(
        &mut self,
        idx: u64,
        stack: &mut Vec<Frame>,
        keep: &impl Fn(u8) -> bool,
        exclude: Option<usize>,
    ) {
        let exp = self
            .space
            .expand(idx)
            .unwrap_or_else(|_| panic!("state {idx} expanded during reachability"));
        let succs = self
            .space
            .successors(idx, &exp, exclude)
            .into_iter()
            .filter(|&s| keep(self.colors[s as usize]))
            .collect();
        self.colors[idx as usize] |= GRAY;
        stack.push(Frame { idx, succs, next: 0 });
    }
}

/// Dense state space of `I ∘ SDR` (or `I` alone) with initial distances in
/// `0..=d_init_max` and reachable distances capped at `d_init_max + n`.
///
/// With `normalize_clean`, the distance of a clean process is folded to 0;
/// no guard or action reads it, so the folded system is isomorphic on
/// everything observable.
pub fn composed_space<'a, A, I>(
    alg: &'a A,
    inner: &I,
    graph: &'a Graph,
    d_init_max: u64,
    normalize_clean: bool,
) -> Result<StateSpace<'a, A>, ExploreError>
where
    I: InputAlgorithm,
    A: Algorithm<State = ComposedState<I::State>>,
{
    let d_cap = d_init_max + graph.n() as u64;
    let mut locals = Vec::with_capacity(graph.n());
    let mut init_ok = Vec::with_capacity(graph.n());
    for u in 0..graph.n() {
        let inner_states = inner.local_domain(graph, u);
        let mut l = Vec::new();
        let mut ok = Vec::new();
        for st in Status::ALL {
            let ds = if st == Status::C && normalize_clean {
                0..=0
            } else {
                0..=d_cap
            };
            for d in ds {
                for s in &inner_states {
                    l.push(ComposedState {
                        sdr: SdrState { st, d },
                        inner: s.clone(),
                    });
                    ok.push(d <= d_init_max);
                }
            }
        }
        locals.push(l);
        init_ok.push(ok);
    }
    let normalize: Normalizer<'_, ComposedState<I::State>> =
        if normalize_clean {
            Box::new(|s: &ComposedState<I::State>| {
                let mut s = s.clone();
                if s.sdr.st == Status::C {
                    s.sdr.d = 0;
                }
                s
            })
        } else {
            Box::new(|s: &ComposedState<I::State>| s.clone())
        };
    StateSpace::new(alg, graph, locals, init_ok, normalize)
}

/// Distance measure for composed states.
pub fn distance<S>(s: &ComposedState<S>) -> u64 {
    s.sdr.d
}

/// Summary line for reports.
pub fn describe<S: Debug + Hash + Eq>(r: &ExplorationResult<S>) -> String {
    format!(
        "index_space={} initial={} reachable={} terminals={} target={} certified={} max_d={}",
        r.index_space,
        r.initial,
        r.reachable,
        r.terminals,
        r.target_states,
        r.certified,
        r.max_measure
    )
}
