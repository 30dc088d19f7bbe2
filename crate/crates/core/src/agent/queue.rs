use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::CommandLink;
use crate::guard::Observation;
use crate::sim::{Ack, CommandError, RoboticCommand};

/// Park attempts that land short of the terminal are retried this many times.
const PARK_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandOrigin {
    Operator,
    Guard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentCommand {
    pub robot_id: String,
    pub command: RoboticCommand,
    pub result: Result<Ack, CommandError>,
    pub origin: CommandOrigin,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueueOutput {
    pub sent: Vec<SentCommand>,
    pub observations: Vec<(String, Observation)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Pending {
    commands: VecDeque<RoboticCommand>,
    origin: CommandOrigin,
    /// The last command sent was a MoveTo still under way.
    moving: bool,
    park_attempts: u32,
}

/// Per-robot command executor.
///
/// Commands go out one at a time; after a `MoveTo` the next command waits
/// until the robot reports arrival. Any refusal drops the rest of the plan.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandQueue {
    robots: BTreeMap<String, Pending>,
}

impl CommandQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces whatever `robot_id` was doing.
    pub fn load(&mut self, robot_id: &str, commands: Vec<RoboticCommand>, origin: CommandOrigin) {
        if commands.is_empty() {
            self.robots.remove(robot_id);
            return;
        }
        self.robots.insert(
            robot_id.to_string(),
            Pending { commands: commands.into(), origin, moving: false, park_attempts: 0 },
        );
    }

    pub fn clear(&mut self, robot_id: &str) {
        self.robots.remove(robot_id);
    }

    pub fn is_idle(&self, robot_id: &str) -> bool {
        !self.robots.contains_key(robot_id)
    }

    pub fn origin(&self, robot_id: &str) -> Option<CommandOrigin> {
        self.robots.get(robot_id).map(|p| p.origin)
    }

    pub fn remaining(&self, robot_id: &str) -> Vec<RoboticCommand> {
        self.robots.get(robot_id).map(|p| p.commands.iter().cloned().collect()).unwrap_or_default()
    }

    /// Sends every command that is ready.
    pub fn advance(&mut self, link: &mut dyn CommandLink) -> QueueOutput {
        let mut out = QueueOutput::default();
        let mut done = Vec::new();
        for (id, p) in self.robots.iter_mut() {
            if drive(id, p, link, &mut out) {
                done.push(id.clone());
            }
        }
        for id in done {
            self.robots.remove(&id);
        }
        out
    }
}

/// Returns true once the robot's queue is finished or aborted.
fn drive(id: &str, p: &mut Pending, link: &mut dyn CommandLink, out: &mut QueueOutput) -> bool {
    loop {
        if p.moving {
            if !link.arrived(id) {
                return false;
            }
            p.moving = false;
        }
        let Some(cmd) = p.commands.pop_front() else {
            return true;
        };
        let result = link.send(id, &cmd);
        out.sent.push(SentCommand { robot_id: id.to_string(), command: cmd.clone(), result: result.clone(), origin: p.origin });
        match (&cmd, result) {
            (RoboticCommand::MoveTo { .. }, Ok(_)) => p.moving = true,
            (RoboticCommand::Park { .. }, Ok(_)) if p.origin == CommandOrigin::Guard => {
                out.observations.push((id.to_string(), Observation::ParkConfirmed));
            }
            (_, Ok(_)) => {}
            (RoboticCommand::Park { .. }, Err(CommandError::NotAtTerminal { .. }))
                if p.park_attempts < PARK_RETRIES =>
            {
                p.park_attempts += 1;
                p.commands.push_front(cmd);
                return false;
            }
            (_, Err(_)) => return true,
        }
    }
}
