use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoCoordinate, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct FailureFlags {
    pub communication: bool,
    pub gps: bool,
    pub sensor_power: bool,
    pub propulsion: bool,
}

impl FailureFlags {
    pub fn any(&self) -> bool {
        self.communication || self.gps || self.sensor_power || self.propulsion
    }

    pub fn get(&self, flag: FailureFlag) -> bool {
        match flag {
            FailureFlag::Communication => self.communication,
            FailureFlag::Gps => self.gps,
            FailureFlag::SensorPower => self.sensor_power,
            FailureFlag::Propulsion => self.propulsion,
        }
    }

    pub fn set(&mut self, flag: FailureFlag, value: bool) {
        match flag {
            FailureFlag::Communication => self.communication = value,
            FailureFlag::Gps => self.gps = value,
            FailureFlag::SensorPower => self.sensor_power = value,
            FailureFlag::Propulsion => self.propulsion = value,
        }
    }

    /// The flag combination encoded by the low four bits of `bits`, in the
    /// order communication, gps, sensor_power, propulsion.
    pub fn from_bits(bits: u8) -> Self {
        Self {
            communication: bits & 1 != 0,
            gps: bits & 2 != 0,
            sensor_power: bits & 4 != 0,
            propulsion: bits & 8 != 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureFlag {
    Communication,
    Gps,
    SensorPower,
    Propulsion,
}

impl FailureFlag {
    pub const ALL: [FailureFlag; 4] =
        [FailureFlag::Communication, FailureFlag::Gps, FailureFlag::SensorPower, FailureFlag::Propulsion];

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "communication" => FailureFlag::Communication,
            "gps" => FailureFlag::Gps,
            "sensor_power" => FailureFlag::SensorPower,
            "propulsion" => FailureFlag::Propulsion,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: String,
    pub position: GeoCoordinate,
    /// Ground velocity over the last step (commanded plus drift), m/s.
    pub velocity: Vec2,
    pub anchored: bool,
    pub parked_at: Option<String>,
    /// Remaining fuel as a fraction of a full tank.
    pub fuel: f64,
    pub failures: FailureFlags,
    pub last_fix_time: Option<f64>,
}

/// The robotic command language: the bottom layer of the agent stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RoboticCommand {
    GetCoordinates,
    MoveTo { target: GeoCoordinate, speed: f64 },
    Anchor,
    ReleaseAnchor,
    Park { terminal: String },
    Halt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub robot_id: String,
    pub position: GeoCoordinate,
    pub timestamp: f64,
}

/// Answer to `GetCoordinates`: the fix plus the robot's self-reported
/// state at that moment (position replaced by the fix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub fix: GpsFix,
    pub state: RobotState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ack", rename_all = "snake_case")]
pub enum Ack {
    Telemetry(Telemetry),
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum CommandError {
    #[error("unknown robot {id}")]
    UnknownRobot { id: String },
    /// The command never reached the robot.
    #[error("communication timeout")]
    CommTimeout,
    /// The robot answered but has no fix. Carries its health report.
    #[error("GPS unavailable")]
    GpsUnavailable { health: FailureFlags },
    #[error("anchor refused: {reason}")]
    AnchorRefused { reason: String },
    #[error("robot is anchored")]
    AnchorEngaged,
    #[error("robot is {distance_m:.1} m from terminal {terminal}")]
    NotAtTerminal { terminal: String, distance_m: f64 },
    #[error("{terminal} is not a parking landmark")]
    UnknownTerminal { terminal: String },
    #[error("speed {speed} outside (0, max_speed]")]
    InvalidSpeed { speed: f64 },
    #[error("target is not a valid coordinate")]
    InvalidTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown robot {0}")]
    UnknownRobot(String),
    #[error("robot {0} already exists")]
    DuplicateRobot(String),
    #[error("robot {0} has an invalid position or fuel level")]
    InvalidRobot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// A MoveTo completes once the robot is this close to its target.
    pub arrival_radius_m: f64,
    pub max_speed: f64,
    /// Fuel fraction burnt per metre of commanded travel.
    pub fuel_per_m: f64,
    /// Anchoring is refused deeper than this.
    pub max_anchor_depth_m: f64,
    /// Half-width of the uniform GPS error on each axis; 0 disables noise.
    pub gps_noise_m: f64,
    /// Robots farther than this from every flow feel no drift.
    pub corridor_m: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            arrival_radius_m: 5.0,
            max_speed: 2.0,
            fuel_per_m: 0.001,
            max_anchor_depth_m: 30.0,
            gps_noise_m: 0.0,
            corridor_m: crate::mdl::DEFAULT_CORRIDOR_M,
            seed: 0,
        }
    }
}

/// Initial conditions of a robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub id: String,
    pub position: GeoCoordinate,
    #[serde(default = "full_tank")]
    pub fuel: f64,
    #[serde(default = "yes")]
    pub anchor_operational: bool,
}

fn full_tank() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl RobotSpec {
    pub fn new(id: impl Into<String>, position: GeoCoordinate) -> Self {
        Self { id: id.into(), position, fuel: 1.0, anchor_operational: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guidance {
    pub target: GeoCoordinate,
    pub speed: f64,
}
