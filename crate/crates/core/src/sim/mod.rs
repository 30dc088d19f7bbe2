//! Deterministic discrete-time simulator of submarines in a river.
//!
//! Robots are first-order point masses: each step they move by their
//! commanded velocity plus the ambient flow of the nearest flow segment.
//! Failures are injected per robot and affect what the robot can do and
//! what it reports.

mod types;
mod world;

pub use types::{
    Ack, CommandError, FailureFlag, FailureFlags, GpsFix, Guidance, RobotSpec, RobotState, RoboticCommand,
    SimConfig, SimError, Telemetry,
};
pub use world::World;
