//! Deterministic discrete-event simulator and policy library for real-time
//! task offloading from vehicles to heterogeneous edge servers.
//!
//! A central broker receives tasks over RSU links, orders its waiting queue
//! with a pluggable task-selection policy every tick, and places each task on
//! a processing unit with a pluggable resource-selection policy — classical
//! baselines plus suitability-based adaptive selection with optional standby
//! reservation. The `sweep` module reruns policy pairings over paired seeds
//! and reports task completion rates.
//!
//! Everything is reproducible: fixed-point event times, a stream-cipher RNG
//! with documented sub-streams, and deterministic tie-breaks everywhere a
//! policy or the engine makes a choice.

pub mod domain;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod pora;
pub mod rsp;
pub mod scenario;
pub mod sweep;
pub mod time;
pub mod timing;
pub mod tsp;
pub mod workload;

pub use error::{Error, Result};
pub use time::Time;
