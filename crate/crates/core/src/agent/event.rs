use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoCoordinate;
use crate::sim::RoboticCommand;

/// Operator gestures: the top layer of the agent stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UIEvent {
    ClickOnRobot { robot_id: String },
    DragRobot { robot_id: String, target: GeoCoordinate },
    PlaceRobot { robot_id: String },
    MenuSelect { robot_id: String, item: MenuItem },
}

impl UIEvent {
    pub fn robot_id(&self) -> &str {
        match self {
            UIEvent::ClickOnRobot { robot_id }
            | UIEvent::DragRobot { robot_id, .. }
            | UIEvent::PlaceRobot { robot_id }
            | UIEvent::MenuSelect { robot_id, .. } => robot_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuItem {
    /// Drag the marker and drop it at a new position.
    DragPlace,
    Park,
    ComputeOptimalFlow,
    Anchor,
    Release,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InterpreterResponse {
    /// `scale_denominator` is `None` when the robot is outside every scale
    /// region.
    ContextMenu { items: Vec<MenuItem>, scale_denominator: Option<u64> },
    DragStarted,
    Dispatched { commands: Vec<RoboticCommand> },
    Rejected { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum AgentError {
    #[error("unknown robot {robot_id}")]
    UnknownRobot { robot_id: String },
    #[error("place without a pending drag")]
    InvalidEventSequence,
    #[error("drop point lies outside every scale region")]
    OffMap,
    #[error("robot {robot_id} is under exception handling")]
    RobotFaulted { robot_id: String },
}
