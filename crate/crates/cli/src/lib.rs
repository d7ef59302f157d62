//! Experiment runner for the reset workbench: single runs with full traces,
//! seeded sweeps into CSV, and exhaustive certification of tiny instances.
//!
//! A run is described by one TOML file ([`config::RunConfig`]); identical
//! config and seed give byte-identical artifacts.

pub mod certify;
pub mod commands;
pub mod config;
pub mod exec;
pub mod sweep;
