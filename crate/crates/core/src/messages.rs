//! Message payloads exchanged between robots.
//!
//! The accusation is the protocol's sole message type; the rest are the
//! application payloads of the three case-study scenarios. Origins and
//! senders are unforgeable: the simulated radio stamps the true sender, so
//! a Byzantine robot can emit arbitrary payload contents but only under its
//! own identity.

use crate::geom::{Aabb, Vec2};
use crate::ids::{RobotId, Timestep};

/// `origin` accuses `accused` of misbehaving. Equality is on the pair, so
/// received sets deduplicate re-transmissions of the same accusation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Accusation {
    pub origin: RobotId,
    pub accused: RobotId,
}

impl Accusation {
    pub fn new(origin: RobotId, accused: RobotId) -> Self {
        Accusation { origin, accused }
    }

    /// Self-accusations are invalid and dropped on receipt.
    pub fn is_well_formed(self) -> bool {
        self.origin != self.accused
    }
}

/// A sighting of the tracked target: who saw it, when, and where.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct TargetObservation {
    pub observer: RobotId,
    pub time: Timestep,
    pub location: Vec2,
}

/// An anchor's reading of the reference clock. Byzantine contents are
/// arbitrary, so no invariant beyond finiteness is assumed on receipt.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ClockObservation {
    pub observer: RobotId,
    pub observed_time: f64,
}

/// A localization belief broadcast. Non-anchor messages must bundle the
/// most recently received anchor message; anchor messages never do.
#[derive(Clone, PartialEq, Debug)]
pub struct LocalizationMsg {
    pub sender: RobotId,
    pub local_time: Timestep,
    pub belief: Aabb,
    pub anchor_flag: bool,
    pub attached: Option<Box<LocalizationMsg>>,
}

impl LocalizationMsg {
    pub fn from_anchor(sender: RobotId, local_time: Timestep, belief: Aabb) -> Self {
        LocalizationMsg { sender, local_time, belief, anchor_flag: true, attached: None }
    }

    pub fn from_non_anchor(
        sender: RobotId,
        local_time: Timestep,
        belief: Aabb,
        attached: LocalizationMsg,
    ) -> Self {
        LocalizationMsg {
            sender,
            local_time,
            belief,
            anchor_flag: false,
            attached: Some(Box::new(attached)),
        }
    }

    /// The anchor message underlying this one: itself for anchor messages,
    /// the attachment otherwise.
    pub fn underlying_anchor(&self) -> Option<&LocalizationMsg> {
        if self.anchor_flag {
            Some(self)
        } else {
            self.attached.as_deref()
        }
    }
}
