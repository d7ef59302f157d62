//! Seeded sweeps: one run per seed, aggregated into a CSV.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::exec::{bound_names, execute, Outcome, RunError};

/// Parses `a..b` (exclusive) or `a..=b` (inclusive).
pub fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let bad = || format!("seed range `{s}` is not `a..b` or `a..=b`");
    let (lo, hi, inclusive) = if let Some((lo, hi)) = s.split_once("..=") {
        (lo, hi, true)
    } else if let Some((lo, hi)) = s.split_once("..") {
        (lo, hi, false)
    } else {
        return Err(bad());
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    let hi = if inclusive {
        hi.checked_add(1).ok_or_else(bad)?
    } else {
        hi
    };
    Ok(lo..hi.max(lo))
}

pub struct SweepResult {
    pub runs: usize,
    /// Seeds whose run reported at least one problem.
    pub failing: Vec<(u64, Outcome)>,
}

/// Runs every seed (in parallel, each run sequential) and writes one CSV
/// row per seed in seed order.
pub fn sweep<W: Write>(cfg: &RunConfig, seeds: Range<u64>, out: W) -> Result<SweepResult, RunError> {
    // Validate even when the range is empty.
    cfg.prepare(seeds.start)?;
    let outcomes: Vec<Outcome> = seeds
        .clone()
        .into_par_iter()
        .map(|seed| execute(cfg, seed, false))
        .collect::<Result<_, _>>()?;

    let bounds = bound_names(cfg.algorithm, cfg.init);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "n",
        "m",
        "D",
        "Delta",
        "seed",
        "terminal",
        "steps",
        "rounds",
        "moves",
        "rounds_to_normal",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(bounds.iter().map(|b| format!("margin_{b}")));
    header.extend(["violations", "problems", "alliance", "one_minimal"].map(String::from));
    w.write_record(&header).map_err(csv_io)?;

    let opt = |v: Option<String>| v.unwrap_or_default();
    for o in &outcomes {
        let r = &o.report;
        let mut row = vec![
            r.graph.n.to_string(),
            r.graph.m.to_string(),
            r.graph.diameter.to_string(),
            r.graph.delta_max.to_string(),
            r.seed.to_string(),
            r.terminal.to_string(),
            r.steps.to_string(),
            r.rounds.to_string(),
            r.total_moves.to_string(),
            opt(r.rounds_to_normal.map(|x| x.to_string())),
        ];
        row.extend(r.bounds.iter().map(|b| opt(b.margin().map(|x| x.to_string()))));
        row.push(match &r.monitors {
            Some(m) => m.total().to_string(),
            None => String::new(),
        });
        row.push(r.problems.len().to_string());
        row.push(opt(r.oracle.as_ref().map(|x| x.alliance.to_string())));
        row.push(opt(r.oracle.as_ref().map(|x| x.one_minimal.to_string())));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush().map_err(|e| RunError::Io(e.to_string()))?;

    let runs = outcomes.len();
    let failing = seeds
        .zip(outcomes)
        .filter(|(_, o)| !o.report.problems.is_empty())
        .collect();
    Ok(SweepResult { runs, failing })
}

fn csv_io(e: csv::Error) -> RunError {
    RunError::Io(e.to_string())
}
