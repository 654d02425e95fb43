//! Decentralized Blocklist Protocol (DBP) building blocks.
//!
//! Cooperative robots accuse misbehaving peers; accusations flood through
//! the swarm and every robot computes a deterministic maximum matching on
//! the resulting accusation graph. The matched vertices form the robot's
//! blocklist. When accusations are sound (cooperative robots only ever
//! accuse Byzantine ones) the accusation graph is semi-bipartite, the
//! blocklist never contains more cooperative robots than there are
//! Byzantine ones, and once the Hall condition holds every Byzantine robot
//! is blocked.
//!
//! This crate is the pure protocol library: identifiers, planar geometry,
//! message payloads, the accusation graph and matching, floodability
//! analysis for time-varying directed graphs, the per-robot protocol state
//! machine, and the W-MSR trimmed-mean filter used as a comparison
//! baseline. The discrete-time simulator lives in `dbp-sim`.

pub mod flooding;
pub mod geom;
pub mod graph;
pub mod ids;
pub mod matching;
pub mod messages;
pub mod oracle;
pub mod protocol;
pub mod wmsr;

pub use flooding::{
    flood_with_budget, is_k_n_floodable, is_n_floodable, k_n_floodable_witness, FloodError,
    FloodFailure, FloodTrace, TimeVaryingGraph,
};
pub use geom::{Aabb, Vec2};
pub use graph::AccusationGraph;
pub use ids::{Cooperation, Role, RobotId, Timestep};
pub use matching::{blocklist_of, hall_condition_holds, maximum_matching, HallError, Matching};
pub use messages::{Accusation, ClockObservation, LocalizationMsg, TargetObservation};
pub use protocol::DbpState;
pub use wmsr::{wmsr_observer_inject, wmsr_step, wmsr_step_with_survivors, WmsrParams};
