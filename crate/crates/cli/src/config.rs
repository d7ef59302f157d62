//! Run configuration: TOML file, command-line overrides, validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sdr_core::alliance::{AllianceError, FgParams, Fga, FgaMutation, Preset};
use sdr_core::engine::{DaemonKind, Limits};
use sdr_core::graph::{Graph, GraphError, GraphKind, DEFAULT_EXTRA_EDGE_PROBABILITY};
use sdr_core::sdr::{ComposedState, InputAlgorithm, SdrMutation};
use sdr_core::unison::{Unison, UnisonError, UnisonMutation};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("unison: {0}")]
    Unison(#[from] UnisonError),
    #[error("alliance: {0}")]
    Alliance(#[from] AllianceError),
    #[error("daemon: {0}")]
    Daemon(String),
    #[error("{0}")]
    Invalid(String),
    #[error("initial configuration: {0}")]
    Init(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Unison,
    Alliance,
    UnisonSdr,
    AllianceSdr,
}

impl AlgorithmKind {
    pub fn composed(self) -> bool {
        matches!(self, AlgorithmKind::UnisonSdr | AlgorithmKind::AllianceSdr)
    }

    pub fn is_alliance(self) -> bool {
        matches!(self, AlgorithmKind::Alliance | AlgorithmKind::AllianceSdr)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    #[default]
    GammaInit,
    Random,
    File,
}

/// Either a generator (`kind`, `n`, optional `seed` and `p`) or an edge-list `file`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: Option<GraphKind>,
    pub n: Option<usize>,
    /// Generator seed; defaults to the run seed.
    pub seed: Option<u64>,
    /// Extra-edge probability for `random_connected`.
    pub p: Option<f64>,
    pub file: Option<PathBuf>,
}

impl GraphSpec {
    /// The graph; `seed` is used when the spec names none.
    pub fn build(&self, seed: u64) -> Result<Graph, ConfigError> {
        match (&self.file, self.kind, self.n) {
            (Some(file), None, None) => {
                let text = fs::read_to_string(file).map_err(|source| ConfigError::Io {
                    path: file.clone(),
                    source,
                })?;
                Ok(Graph::from_edge_list(&text)?)
            }
            (None, Some(kind), Some(n)) => {
                let p = self.p.unwrap_or(DEFAULT_EXTRA_EDGE_PROBABILITY);
                if !(0.0..=1.0).contains(&p) {
                    return Err(ConfigError::Invalid(format!(
                        "graph.p must be in [0, 1], got {p}"
                    )));
                }
                Ok(Graph::generate_with(kind, n, self.seed.unwrap_or(seed), p)?)
            }
            _ => Err(ConfigError::Invalid(
                "graph needs either `file` or both `kind` and `n`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub graph: GraphSpec,
    #[serde(default = "default_daemon")]
    pub daemon: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitMode,
    pub init_file: Option<PathBuf>,
    pub max_steps: Option<usize>,
    pub max_rounds: Option<usize>,
    #[serde(default = "default_true")]
    pub monitors: bool,
    /// Enumerate reset branches in every configuration (slow on large n).
    #[serde(default = "default_true")]
    pub branches: bool,
    /// Clock period; defaults to n + 1.
    #[serde(alias = "K")]
    pub k: Option<u32>,
    pub preset: Option<String>,
    pub f: Option<Vec<u32>>,
    pub g: Option<Vec<u32>>,
    pub ids: Option<Vec<u64>>,
    /// Deliberate fault, e.g. `weak_rule_c` or `ignores_clean`.
    pub mutation: Option<String>,
    /// Steps to keep simulating after the first legitimate configuration
    /// (unison never terminates).
    pub after_normal: Option<usize>,
    /// Largest initial distance for `certify`; defaults to n.
    pub d_init_max: Option<u64>,
    pub budget: Option<u64>,
}

fn default_daemon() -> String {
    "synchronous".into()
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_AFTER_NORMAL: usize = 1000;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<u32>,
    pub daemon: Option<String>,
    pub max_steps: Option<usize>,
    pub max_rounds: Option<usize>,
    pub monitors: Option<bool>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.graph.file, &mut cfg.init_file].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.k.is_some() {
            self.k = o.k;
        }
        if let Some(d) = &o.daemon {
            self.daemon = d.clone();
        }
        if o.max_steps.is_some() {
            self.max_steps = o.max_steps;
        }
        if o.max_rounds.is_some() {
            self.max_rounds = o.max_rounds;
        }
        if let Some(m) = o.monitors {
            self.monitors = m;
        }
    }

    /// The graph for a run with `seed` (the generator seed defaults to it).
    pub fn build_graph(&self, seed: u64) -> Result<Graph, ConfigError> {
        self.graph.build(seed)
    }

    /// Validates everything and builds the run's ingredients.
    pub fn prepare(&self, seed: u64) -> Result<Prepared, ConfigError> {
        let daemon: DaemonKind = self.daemon.parse().map_err(ConfigError::Daemon)?;
        let graph = self.build_graph(seed)?;
        let mutation = Mutation::parse(self.mutation.as_deref().unwrap_or("none"))?;
        let program = if self.algorithm.is_alliance() {
            if self.k.is_some() {
                return Err(ConfigError::Invalid("`k` only applies to unison".into()));
            }
            let params = self.alliance_params(&graph)?;
            let fga = match mutation {
                Mutation::Fga(m) => Fga::new(params).with_mutation(m),
                _ => Fga::new(params),
            };
            Program::Alliance(fga)
        } else {
            if self.preset.is_some() || self.f.is_some() || self.g.is_some() || self.ids.is_some() {
                return Err(ConfigError::Invalid(
                    "`preset`, `f`, `g` and `ids` only apply to alliance".into(),
                ));
            }
            let k = self.k.unwrap_or(graph.n() as u32 + 1);
            let u = Unison::new(k, graph.n())?;
            Program::Unison(match mutation {
                Mutation::Unison(m) => u.with_mutation(m),
                _ => u,
            })
        };
        let fits = match mutation {
            Mutation::None => true,
            Mutation::Sdr(_) => self.algorithm.composed(),
            Mutation::Unison(_) => !self.algorithm.is_alliance(),
            Mutation::Fga(_) => self.algorithm.is_alliance(),
        };
        if !fits {
            return Err(ConfigError::Invalid(format!(
                "mutation `{}` does not apply to {:?}",
                self.mutation.as_deref().unwrap_or_default(),
                self.algorithm
            )));
        }
        let sdr_mutation = match mutation {
            Mutation::Sdr(m) => m,
            _ => SdrMutation::None,
        };
        if self.init == InitMode::File && self.init_file.is_none() {
            return Err(ConfigError::Invalid("init = \"file\" needs `init_file`".into()));
        }
        if self.init != InitMode::File && self.init_file.is_some() {
            return Err(ConfigError::Invalid(
                "`init_file` is only read with init = \"file\"".into(),
            ));
        }
        let defaults = Limits::default();
        let limits = Limits {
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
            max_rounds: self.max_rounds.unwrap_or(defaults.max_rounds),
        };
        Ok(Prepared {
            graph,
            daemon,
            program,
            sdr_mutation,
            limits,
        })
    }

    fn alliance_params(&self, graph: &Graph) -> Result<FgParams, ConfigError> {
        let n = graph.n();
        let ids = self.ids.clone().unwrap_or_else(|| (0..n as u64).collect());
        let (f, g) = match (&self.preset, &self.f, &self.g) {
            (Some(p), None, None) => Preset::parse(p)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown preset `{p}`")))?
                .values(graph),
            (None, Some(f), Some(g)) => (f.clone(), g.clone()),
            (None, None, None) => Preset::DominatingSet.values(graph),
            _ => {
                return Err(ConfigError::Invalid(
                    "give either `preset` or both `f` and `g`".into(),
                ))
            }
        };
        Ok(FgParams::new(graph, f, g, ids)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mutation {
    None,
    Sdr(SdrMutation),
    Unison(UnisonMutation),
    Fga(FgaMutation),
}

impl Mutation {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "none" => Mutation::None,
            "rb_skips_reset" => Mutation::Sdr(SdrMutation::RbSkipsReset),
            "weak_rule_c" => Mutation::Sdr(SdrMutation::WeakRuleC),
            "weak_rule_rf" => Mutation::Sdr(SdrMutation::WeakRuleRf),
            "ignores_clean" => Mutation::Unison(UnisonMutation::IgnoresClean),
            "writes_distance" => Mutation::Unison(UnisonMutation::WritesDistance),
            "q_keeps_ptr" => Mutation::Fga(FgaMutation::QKeepsPtr),
            other => return Err(ConfigError::Invalid(format!("unknown mutation `{other}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Program {
    Unison(Unison),
    Alliance(Fga),
}

/// A validated run: graph, daemon, algorithm instance and limits.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Graph,
    pub daemon: DaemonKind,
    pub program: Program,
    pub sdr_mutation: SdrMutation,
    pub limits: Limits,
}

/// Parses and checks a state dump against the algorithm's local domains.
pub fn load_init<I>(
    inner: &I,
    graph: &Graph,
    path: &Path,
) -> Result<Vec<ComposedState<I::State>>, ConfigError>
where
    I: InputAlgorithm,
    I::State: for<'de> Deserialize<'de>,
{
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    let config: Vec<ComposedState<I::State>> =
        serde_json::from_str(&text).map_err(|e| ConfigError::Init(e.to_string()))?;
    if config.len() != graph.n() {
        return Err(ConfigError::Init(format!(
            "{} states for {} processes",
            config.len(),
            graph.n()
        )));
    }
    for (u, s) in config.iter().enumerate() {
        if !inner.local_domain(graph, u).contains(&s.inner) {
            return Err(ConfigError::Init(format!(
                "process {u} holds {:?}, outside its domain",
                s.inner
            )));
        }
    }
    Ok(config)
}
