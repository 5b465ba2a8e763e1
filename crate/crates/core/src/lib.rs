//! Deterministic simulator and policy toolkit for a three-layer access network:
//! a software-defined wireless mesh, a direct-to-mobile (D2M) broadcast offload
//! layer, and a broker cluster that buffers traffic and fails over on outages.
//!
//! The crate is organised by layer:
//!
//! * [`scenario`] describes the simulated world and loads it from JSON.
//! * [`traffic`] samples session arrivals and computes load and utilization.
//! * [`mesh`] computes minimum-hop routes, mesh diameter and rerouting.
//! * [`d2m`] partitions spectrum and models broadcast offloading.
//! * [`broker`] injects failures and models failover and buffering.
//! * [`metrics`] holds every KPI formula and the Student-t intervals.
//! * [`engine`] runs the time-stepped simulation and compares modes.
//! * [`policy`] evaluates subsidy, penetration, PPP and policy-score economics.
//!
//! Every stochastic draw comes from a named substream of one root seed (see
//! [`rng`]), so a `(config, seed)` pair always reproduces the same run.

pub mod broker;
pub mod curve;
pub mod d2m;
pub mod engine;
pub mod mesh;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod scenario;
pub mod traffic;

pub use engine::{ComparisonReport, RunResult};
pub use scenario::{load_scenario, Mode, ScenarioConfig, Topology};
