//! Subcommand bodies. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use crate::certify::{certify, CertifyError};
use crate::config::{ConfigError, Overrides, RunConfig};
use crate::exec::{execute, RunError};
use crate::sweep::sweep;
use sdr_core::explorer::ExploreError;

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// Monitor violation, broken bound, failed oracle, or refuted certification.
    pub const VIOLATION: u8 = 1;
    /// The config did not validate.
    pub const INVALID: u8 = 2;
    /// The explorer ran out of budget or the instance is too large to index.
    pub const BUDGET: u8 = 3;
    /// Engine or I/O failure.
    pub const FAILURE: u8 = 4;
}

pub struct Invocation {
    pub config: PathBuf,
    pub overrides: Overrides,
    pub out_dir: PathBuf,
}

pub const DEFAULT_OUT_DIR: &str = "sdrlab-out";

fn load(inv: &Invocation) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::load(&inv.config)?;
    cfg.apply(&inv.overrides);
    Ok(cfg)
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => exit::INVALID,
        RunError::Engine(_) | RunError::Io(_) => exit::FAILURE,
    }
}

fn write_file(path: &Path, bytes: &[u8], err: &mut dyn Write) -> bool {
    let ok = path
        .parent()
        .map_or(Ok(()), fs::create_dir_all)
        .and_then(|_| fs::write(path, bytes));
    if let Err(e) = ok {
        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
        return false;
    }
    true
}

fn pretty<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

/// `run`: trace.jsonl, report.json, init.json and the resolved config.toml.
pub fn run(inv: &Invocation, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(inv) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::INVALID;
        }
    };
    let outcome = match execute(&cfg, cfg.seed, true) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return run_error_code(&e);
        }
    };
    let dir = &inv.out_dir;
    let resolved = toml::to_string(&cfg).expect("configs serialize");
    let written = write_file(&dir.join("trace.jsonl"), &outcome.trace_jsonl, err)
        && write_file(&dir.join("report.json"), &pretty(&outcome.report), err)
        && write_file(&dir.join("init.json"), outcome.init_json.as_bytes(), err)
        && write_file(&dir.join("config.toml"), resolved.as_bytes(), err);
    if !written {
        return exit::FAILURE;
    }
    let _ = writeln!(out, "{}", outcome.report.summary_line());
    if cfg.monitors && !outcome.report.problems.is_empty() {
        for p in &outcome.report.problems {
            let _ = writeln!(err, "violation: {p}");
        }
        return exit::VIOLATION;
    }
    exit::OK
}

/// `sweep`: sweep.csv, plus the report and initial configuration of every
/// failing seed under `failures/`.
pub fn sweep_cmd(inv: &Invocation, seeds: Range<u64>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(inv) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::INVALID;
        }
    };
    let mut csv = Vec::new();
    let result = match sweep(&cfg, seeds.clone(), &mut csv) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return run_error_code(&e);
        }
    };
    let dir = &inv.out_dir;
    if !write_file(&dir.join("sweep.csv"), &csv, err) {
        return exit::FAILURE;
    }
    for (seed, o) in &result.failing {
        let base = dir.join("failures");
        let ok = write_file(&base.join(format!("seed-{seed}.report.json")), &pretty(&o.report), err)
            && write_file(&base.join(format!("seed-{seed}.init.json")), o.init_json.as_bytes(), err);
        if !ok {
            return exit::FAILURE;
        }
    }
    let _ = writeln!(
        out,
        "sweep seeds={}..{} runs={} failing={} csv={}",
        seeds.start,
        seeds.end,
        result.runs,
        result.failing.len(),
        dir.join("sweep.csv").display()
    );
    if cfg.monitors && !result.failing.is_empty() {
        for (seed, o) in result.failing.iter().take(10) {
            let _ = writeln!(err, "seed {seed}: {}", o.report.problems.join("; "));
        }
        return exit::VIOLATION;
    }
    exit::OK
}

/// `certify`: the certificate JSON on stdout and in certificate.json.
pub fn certify_cmd(inv: &Invocation, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(inv) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::INVALID;
        }
    };
    let cert = match certify(&cfg) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return match e {
                CertifyError::Config(_) | CertifyError::NotComposed => exit::INVALID,
                CertifyError::Explore(ExploreError::BudgetExhausted { .. })
                | CertifyError::Explore(ExploreError::TooLarge(_)) => exit::BUDGET,
            };
        }
    };
    let json = pretty(&cert);
    let _ = out.write_all(&json);
    if !write_file(&inv.out_dir.join("certificate.json"), &json, err) {
        return exit::FAILURE;
    }
    if cert.certified {
        exit::OK
    } else {
        let _ = writeln!(
            err,
            "not certified: counterexample {}",
            cert.result["counterexample"]
        );
        exit::VIOLATION
    }
}
