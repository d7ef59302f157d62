//! Exhaustive certification of a composed instance from every initial
//! configuration with distances in `0..=d_init_max`.

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use sdr_core::alliance::{is_1_minimal, is_fg_alliance, members, FgParams};
use sdr_core::explorer::{composed_space, distance, explore, ExploreError, Goal, DEFAULT_BUDGET};
use sdr_core::sdr::{ComposedState, Sdr};

use crate::config::{ConfigError, Program, RunConfig};
use crate::exec::GraphInfo;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("certify needs a composed algorithm (unison_sdr or alliance_sdr)")]
    NotComposed,
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub algorithm: String,
    pub graph: GraphInfo,
    pub k: Option<u32>,
    pub params: Option<FgParams>,
    pub mutation: Option<String>,
    pub d_init_max: u64,
    pub budget: u64,
    /// `convergence` (unison) or `silence` (alliance).
    pub goal: &'static str,
    pub certified: bool,
    /// The full exploration result, counterexample included.
    pub result: Value,
}

pub fn certify(cfg: &RunConfig) -> Result<Certificate, CertifyError> {
    if !cfg.algorithm.composed() {
        return Err(CertifyError::NotComposed);
    }
    let prep = cfg.prepare(cfg.seed)?;
    let graph = &prep.graph;
    let d_init_max = cfg.d_init_max.unwrap_or(graph.n() as u64);
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);
    let (goal, k, params, result, certified) = match &prep.program {
        Program::Unison(u) => {
            let sdr = Sdr::with_mutation(u.clone(), prep.sdr_mutation);
            let space = composed_space(&sdr, u, graph, d_init_max, true)?;
            let goal = Goal::Convergence {
                target: Box::new(|c: &[ComposedState<_>]| u.legitimate(graph, c)),
            };
            let r = explore(&space, &goal, budget, &distance)?;
            ("convergence", Some(u.k()), None, json(&r), r.certified)
        }
        Program::Alliance(fga) => {
            let sdr = Sdr::with_mutation(fga.clone(), prep.sdr_mutation);
            let space = composed_space(&sdr, fga, graph, d_init_max, true)?;
            let p = fga.params();
            let goal = Goal::Silence {
                terminal_ok: Box::new(|c: &[ComposedState<_>]| {
                    let a = members(c);
                    is_fg_alliance(&a, graph, p) && is_1_minimal(&a, graph, p) == Ok(true)
                }),
            };
            let r = explore(&space, &goal, budget, &distance)?;
            ("silence", None, Some(p.clone()), json(&r), r.certified)
        }
    };
    Ok(Certificate {
        algorithm: format!("{}_sdr", if k.is_some() { "unison" } else { "alliance" }),
        graph: GraphInfo::of(graph),
        k,
        params,
        mutation: cfg.mutation.clone(),
        d_init_max,
        budget,
        goal,
        certified,
        result,
    })
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("exploration results serialize")
}
