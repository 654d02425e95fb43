//! Case-study applications: controllers, accusation rules, and Byzantine
//! attack behaviors, pluggable into the world stepper.

pub mod localization;
pub mod timesync;
pub mod tracking;

use dbp_core::geom::Vec2;
use dbp_core::ids::{RobotId, Timestep};
use dbp_core::messages::{Accusation, ClockObservation, LocalizationMsg, TargetObservation};

use crate::config::WorldConfig;

/// Strict-inequality margin for the accusation rules, so floating-point
/// noise on an exactly-boundary honest message can never flip a comparison.
pub const RULE_EPS: f64 = 1e-9;

/// Everything a robot may broadcast in one tick.
#[derive(Clone, Debug)]
pub enum Payload {
    Accusation(Accusation),
    TargetObs(TargetObservation),
    ClockObs(ClockObservation),
    Loc(LocalizationMsg),
    /// W-MSR scalar consensus value (clock).
    Consensus1(f64),
    /// W-MSR planar consensus value (target estimate).
    Consensus2(Vec2),
}

/// A delivered message; `sender` is stamped by the radio and cannot be
/// forged.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub sender: RobotId,
    pub payload: Payload,
}

/// Read-only per-robot view of the current tick.
pub struct StepCtx<'a> {
    pub now: Timestep,
    pub cfg: &'a WorldConfig,
    pub self_id: RobotId,
    pub pos: Vec2,
    /// Target position when within observation range (tracking only).
    pub direct_target: Option<Vec2>,
    pub reference_clock: f64,
}

/// What a robot decided this tick.
#[derive(Default)]
pub struct StepOutput {
    pub outgoing: Vec<Payload>,
    /// Desired destination; the engine clamps displacement to the speed
    /// bound and the arena. `None` holds position (or defers to the
    /// scenario's default wander policy).
    pub move_to: Option<Vec2>,
    /// Robots to accuse; the engine issues the accusations and checks
    /// soundness against ground-truth roles.
    pub accuse: Vec<RobotId>,
}
