//! Simulation and verification toolkit for a self-stabilizing distributed
//! reset and two algorithms built on it: asynchronous unison and 1-minimal
//! (f,g)-alliance.
//!
//! - [`graph`]: topologies, generators, edge-list I/O.
//! - [`engine`]: composite-atomicity steps, daemons, traces, rounds.
//! - [`sdr`]: the reset layer and its composition contract.
//! - [`unison`], [`alliance`]: input algorithms.
//! - [`analysis`]: trace monitors for roots, branches, segments, closures and bounds.
//! - [`explorer`]: exhaustive state-space certification on tiny instances.

pub mod alliance;
pub mod analysis;
pub mod engine;
pub mod explorer;
pub mod graph;
pub mod sdr;
pub mod unison;
