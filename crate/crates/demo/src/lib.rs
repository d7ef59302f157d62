//! Browser demo: a network running unison or alliance on top of the reset
//! layer, stepped by a daemon, with faults injected by clicking a process.
//!
//! [`Session`] is plain Rust and speaks JSON; [`Demo`] is its wasm-bindgen
//! face for `www/index.html`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sdr_core::alliance::{members, FgParams, Fga, Preset};
use sdr_core::engine::{enabled, step, Algorithm, Daemon, DaemonKind, RoundTracker, RuleMask};
use sdr_core::graph::{Graph, GraphKind};
use sdr_core::sdr::{random_sdr_state, ComposedState, InputAlgorithm, Sdr};
use sdr_core::unison::Unison;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// `unison` or `alliance`.
    pub algorithm: String,
    pub kind: GraphKind,
    pub n: usize,
    pub seed: u64,
    /// Start from a random configuration instead of the all-clean one.
    pub random: bool,
    pub daemon: String,
    /// Alliance preset name, e.g. `dominating_set`.
    pub preset: String,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            algorithm: "unison".into(),
            kind: GraphKind::Ring,
            n: 8,
            seed: 0,
            random: true,
            daemon: "subset_random(0.5)".into(),
            preset: "dominating_set".into(),
        }
    }
}

/// One composed algorithm with its live configuration.
struct Live<I: InputAlgorithm> {
    sdr: Sdr<I>,
    config: Vec<ComposedState<I::State>>,
    enabled: Vec<RuleMask>,
    tracker: RoundTracker,
}

impl<I: InputAlgorithm> Live<I> {
    fn new(inner: I, graph: &Graph, config: Vec<ComposedState<I::State>>) -> Self {
        let sdr = Sdr::new(inner);
        let enabled = enabled(&sdr, graph, &config);
        let tracker = RoundTracker::new(&enabled);
        Live {
            sdr,
            config,
            enabled,
            tracker,
        }
    }

    /// One daemon step: the moves made and whether a round ended, or `None`
    /// when terminal.
    fn step(&mut self, graph: &Graph, daemon: &mut Daemon) -> Result<Option<(Vec<Value>, bool)>, String> {
        if self.enabled.iter().all(|m| m.is_empty()) {
            return Ok(None);
        }
        let act = daemon
            .select(&self.sdr, graph, &self.config, &self.enabled)
            .map_err(|e| e.to_string())?;
        self.config = step(&self.sdr, graph, &self.config, &act).map_err(|e| e.to_string())?;
        self.enabled = enabled(&self.sdr, graph, &self.config);
        let processes: Vec<usize> = act.iter().map(|&(u, _)| u).collect();
        let round_done = self.tracker.observe(&processes, &self.enabled);
        let moves = act
            .iter()
            .map(|&(u, r)| json!({"process": u, "rule": self.sdr.rule_name(r)}))
            .collect::<Vec<_>>();
        Ok(Some((moves, round_done)))
    }

    /// Overwrites process `u` with a random state (a transient fault).
    fn perturb(&mut self, graph: &Graph, u: usize, rng: &mut ChaCha8Rng) {
        use rand::Rng;
        let domain = self.sdr.inner().local_domain(graph, u);
        self.config[u] = ComposedState {
            sdr: random_sdr_state(rng, graph.n() as u64),
            inner: domain[rng.random_range(0..domain.len())].clone(),
        };
        self.enabled = enabled(&self.sdr, graph, &self.config);
        // Faults restart round counting.
        self.tracker = RoundTracker::new(&self.enabled);
    }

    fn normal(&self, graph: &Graph) -> bool {
        self.sdr.is_normal(graph, &self.config)
    }

    fn processes(&self) -> Vec<Value> {
        self.config
            .iter()
            .zip(&self.enabled)
            .map(|(s, m)| {
                json!({
                    "st": s.sdr.st,
                    "d": s.sdr.d,
                    "inner": s.inner,
                    "enabled": m.lowest().map(|r| self.sdr.rule_name(r)),
                })
            })
            .collect()
    }
}

enum Program {
    Unison(Live<Unison>),
    Alliance(Live<Fga>),
}

/// A running demo network.
pub struct Session {
    graph: Graph,
    program: Program,
    daemon: Daemon,
    rng: ChaCha8Rng,
    steps: u64,
    moves: u64,
    rounds: u64,
    last: Vec<Value>,
}

impl Session {
    pub fn new(opts: &Options) -> Result<Self, String> {
        let graph = Graph::generate(opts.kind, opts.n, opts.seed).map_err(|e| e.to_string())?;
        let kind: DaemonKind = opts.daemon.parse()?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(1);
        let program = match opts.algorithm.as_str() {
            "unison" => {
                let u = Unison::for_graph(&graph);
                let init = if opts.random {
                    u.random_config(&graph, &mut rng)
                } else {
                    u.gamma_init(&graph)
                };
                Program::Unison(Live::new(u, &graph, init))
            }
            "alliance" => {
                let preset = Preset::parse(&opts.preset).ok_or_else(|| format!("unknown preset `{}`", opts.preset))?;
                let fga = Fga::new(FgParams::preset(&graph, preset).map_err(|e| e.to_string())?);
                let init = if opts.random {
                    fga.random_config(&graph, &mut rng)
                } else {
                    fga.gamma_init(&graph)
                };
                Program::Alliance(Live::new(fga, &graph, init))
            }
            other => return Err(format!("unknown algorithm `{other}`")),
        };
        Ok(Session {
            daemon: Daemon::new(kind, opts.seed),
            graph,
            program,
            rng,
            steps: 0,
            moves: 0,
            rounds: 0,
            last: Vec::new(),
        })
    }

    pub fn from_json(options: &str) -> Result<Self, String> {
        let opts: Options = serde_json::from_str(options).map_err(|e| e.to_string())?;
        Self::new(&opts)
    }

    /// Advances one step. Returns false if the configuration was terminal.
    pub fn step(&mut self) -> Result<bool, String> {
        let made = match &mut self.program {
            Program::Unison(l) => l.step(&self.graph, &mut self.daemon)?,
            Program::Alliance(l) => l.step(&self.graph, &mut self.daemon)?,
        };
        let Some((moves, round_done)) = made else {
            self.last.clear();
            return Ok(false);
        };
        self.rounds += u64::from(round_done);
        self.steps += 1;
        self.moves += moves.len() as u64;
        self.last = moves;
        Ok(true)
    }

    /// Steps until the configuration is normal (and, for alliance, terminal)
    /// or `max_steps` steps have passed. Returns the steps taken.
    pub fn settle(&mut self, max_steps: u32) -> Result<u32, String> {
        for taken in 0..max_steps {
            let settled = match &self.program {
                Program::Unison(l) => l.normal(&self.graph),
                Program::Alliance(l) => l.enabled.iter().all(|m| m.is_empty()),
            };
            if settled || !self.step()? {
                return Ok(taken);
            }
        }
        Ok(max_steps)
    }

    pub fn perturb(&mut self, u: usize) -> Result<(), String> {
        if u >= self.graph.n() {
            return Err(format!("no process {u}"));
        }
        match &mut self.program {
            Program::Unison(l) => l.perturb(&self.graph, u, &mut self.rng),
            Program::Alliance(l) => l.perturb(&self.graph, u, &mut self.rng),
        }
        self.last.clear();
        Ok(())
    }

    pub fn snapshot(&self) -> Value {
        let (algorithm, processes, normal, terminal, extra) = match &self.program {
            Program::Unison(l) => (
                "unison",
                l.processes(),
                l.normal(&self.graph),
                l.enabled.iter().all(|m| m.is_empty()),
                json!({"k": l.sdr.inner().k()}),
            ),
            Program::Alliance(l) => (
                "alliance",
                l.processes(),
                l.normal(&self.graph),
                l.enabled.iter().all(|m| m.is_empty()),
                json!({"members": members(&l.config)}),
            ),
        };
        json!({
            "algorithm": algorithm,
            "n": self.graph.n(),
            "edges": self.graph.edges(),
            "steps": self.steps,
            "moves": self.moves,
            "rounds": self.rounds,
            "normal": normal,
            "terminal": terminal,
            "processes": processes,
            "last": self.last,
            "extra": extra,
        })
    }
}

/// JavaScript handle on a [`Session`]. Every method returns a JSON snapshot.
#[wasm_bindgen]
pub struct Demo {
    session: Session,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(options_json: &str) -> Result<Demo, JsError> {
        Ok(Demo {
            session: Session::from_json(options_json).map_err(|e| JsError::new(&e))?,
        })
    }

    pub fn snapshot(&self) -> String {
        self.session.snapshot().to_string()
    }

    pub fn step(&mut self) -> Result<String, JsError> {
        self.session.step().map_err(|e| JsError::new(&e))?;
        Ok(self.snapshot())
    }

    pub fn settle(&mut self, max_steps: u32) -> Result<String, JsError> {
        self.session.settle(max_steps).map_err(|e| JsError::new(&e))?;
        Ok(self.snapshot())
    }

    pub fn perturb(&mut self, process: usize) -> Result<String, JsError> {
        self.session.perturb(process).map_err(|e| JsError::new(&e))?;
        Ok(self.snapshot())
    }
}
