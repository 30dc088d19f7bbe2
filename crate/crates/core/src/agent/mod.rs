//! The agent stack: operator events are interpreted into robotic commands,
//! which a per-robot queue feeds to the robots. A poller keeps the
//! last-known positions fresh.

mod event;
mod interpreter;
mod optimizer;
pub mod planner;
mod poller;
mod queue;
mod registry;

pub use event::{AgentError, InterpreterResponse, MenuItem, UIEvent};
pub use interpreter::{move_targets, Interpreter};
pub use optimizer::{default_optimizer, NearestParking, OptimizerError, OptimizerPlugin};
pub use planner::{AgentConfig, Plan, PlanError};
pub use poller::{PollReport, Poller, PollerConfig};
pub use queue::{CommandOrigin, CommandQueue, QueueOutput, SentCommand};
pub use registry::{Registry, RegistryEntry};

use crate::sim::{Ack, CommandError, RoboticCommand, World};

/// The robotic command layer as the agent sees it.
pub trait CommandLink {
    fn send(&mut self, robot_id: &str, cmd: &RoboticCommand) -> Result<Ack, CommandError>;
    /// The robot has no movement order outstanding.
    fn arrived(&self, robot_id: &str) -> bool;
}

impl CommandLink for World {
    fn send(&mut self, robot_id: &str, cmd: &RoboticCommand) -> Result<Ack, CommandError> {
        self.execute_command(robot_id, cmd)
    }

    fn arrived(&self, robot_id: &str) -> bool {
        self.guidance(robot_id).is_none()
    }
}
