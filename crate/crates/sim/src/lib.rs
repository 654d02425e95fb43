//! Deterministic discrete-time swarm simulator for the Decentralized
//! Blocklist Protocol.
//!
//! The world steps in synchronous rounds with a disk-model radio and
//! one-tick message delivery. Three applications plug into the stepper —
//! target tracking, clock synchronization, and cooperative localization —
//! each with scenario-specific accusation rules and a Byzantine attack
//! behavior, and each runnable with DBP, a W-MSR baseline (where
//! applicable), or no mitigation. A run is fully determined by its config
//! and seed, down to the bytes of the metrics CSV.

pub mod config;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod trace;
pub mod world;

pub use config::{resolve_config, AttackConfig, ConfigError, Mitigation, Overrides, Scenario, WorldConfig};
pub use metrics::{to_csv, MetricsRow, METRICS_SCHEMA};
pub use world::{convergence_tick, AppState, RobotState, World};
