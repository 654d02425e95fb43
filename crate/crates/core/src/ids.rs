//! Robot identity, roles, and simulation time.

use std::fmt;
use std::ops::{Add, AddAssign};

/// Stable identifier of a robot, unique for the lifetime of a run.
///
/// The numeric order of ids doubles as the protocol's global tie-breaking
/// rule; every deterministic scan (matching, message sorting, scheduling)
/// walks ids in ascending order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a robot follows the protocol or behaves arbitrarily.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cooperation {
    Cooperative,
    Byzantine,
}

/// Fixed per-run role of a robot. The anchor flag only carries meaning in
/// the time-synchronization and localization scenarios.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Role {
    pub cooperation: Cooperation,
    pub anchor: bool,
}

impl Role {
    pub fn cooperative() -> Self {
        Role { cooperation: Cooperation::Cooperative, anchor: false }
    }

    pub fn anchor() -> Self {
        Role { cooperation: Cooperation::Cooperative, anchor: true }
    }

    pub fn byzantine() -> Self {
        Role { cooperation: Cooperation::Byzantine, anchor: false }
    }

    pub fn is_cooperative(self) -> bool {
        self.cooperation == Cooperation::Cooperative
    }

    pub fn is_byzantine(self) -> bool {
        self.cooperation == Cooperation::Byzantine
    }
}

/// Discrete simulation time. At the default controller rate, 30 ticks
/// correspond to one second of simulated time.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Timestep(pub u32);

impl Timestep {
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Elapsed ticks since `earlier`, saturating at zero.
    pub fn since(self, earlier: Timestep) -> u32 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u32> for Timestep {
    type Output = Timestep;

    fn add(self, rhs: u32) -> Timestep {
        Timestep(self.0 + rhs)
    }
}

impl AddAssign<u32> for Timestep {
    fn add_assign(&mut self, rhs: u32) {
        self.0 += rhs;
    }
}

impl fmt::Display for Timestep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
