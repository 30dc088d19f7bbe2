use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::event::{AgentError, InterpreterResponse, MenuItem, UIEvent};
use super::optimizer::{NearestParking, OptimizerPlugin};
use super::planner::{plan_park, plan_to_landmark, plan_to_point, AgentConfig, Plan, PlanError};
use super::registry::Registry;
use crate::geo::GeoCoordinate;
use crate::guard::ExceptionGuard;
use crate::mdl::{query_scale, MapDocument};
use crate::sim::{RobotState, RoboticCommand};

/// The middle layer: maps operator events onto robotic commands.
///
/// It reads the map, the registry of last-known positions and the guard's
/// ownership, and its only output is the returned response. It never
/// touches a robot.
pub struct Interpreter {
    map: Arc<MapDocument>,
    config: AgentConfig,
    pending_drags: BTreeMap<String, GeoCoordinate>,
    optimizer: Box<dyn OptimizerPlugin>,
}

impl core::fmt::Debug for Interpreter {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Interpreter")
            .field("config", &self.config)
            .field("pending_drags", &self.pending_drags)
            .finish_non_exhaustive()
    }
}

impl Interpreter {
    pub fn new(map: Arc<MapDocument>, config: AgentConfig) -> Self {
        Self::with_optimizer(map, config, Box::new(NearestParking))
    }

    pub fn with_optimizer(map: Arc<MapDocument>, config: AgentConfig, optimizer: Box<dyn OptimizerPlugin>) -> Self {
        Self { map, config, pending_drags: BTreeMap::new(), optimizer }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn pending_drag(&self, robot_id: &str) -> Option<&GeoCoordinate> {
        self.pending_drags.get(robot_id)
    }

    pub fn handle_event(
        &mut self,
        registry: &Registry,
        guard: &ExceptionGuard,
        ev: &UIEvent,
    ) -> Result<InterpreterResponse, AgentError> {
        let id = ev.robot_id();
        let robot = &registry
            .get(id)
            .ok_or_else(|| AgentError::UnknownRobot { robot_id: id.to_string() })?
            .state;
        if guard.owns(id) {
            return Err(AgentError::RobotFaulted { robot_id: id.to_string() });
        }
        match ev {
            UIEvent::ClickOnRobot { .. } => {
                let mut items = alloc::vec![MenuItem::DragPlace, MenuItem::Park, MenuItem::ComputeOptimalFlow];
                items.push(if robot.anchored { MenuItem::Release } else { MenuItem::Anchor });
                Ok(InterpreterResponse::ContextMenu {
                    items,
                    scale_denominator: query_scale(&self.map, &robot.position).ok(),
                })
            }
            UIEvent::DragRobot { target, .. } => {
                if query_scale(&self.map, target).is_err() {
                    return Err(AgentError::OffMap);
                }
                self.pending_drags.insert(id.to_string(), *target);
                Ok(InterpreterResponse::DragStarted)
            }
            UIEvent::PlaceRobot { .. } => {
                let target = self.pending_drags.remove(id).ok_or(AgentError::InvalidEventSequence)?;
                Ok(dispatch(plan_to_point(&self.map, &self.config, robot, &target)))
            }
            UIEvent::MenuSelect { item, .. } => Ok(self.menu(robot, *item)),
        }
    }

    fn menu(&self, robot: &RobotState, item: MenuItem) -> InterpreterResponse {
        match item {
            MenuItem::DragPlace => InterpreterResponse::Rejected {
                reason: "drag the robot marker to a drop point".to_string(),
            },
            MenuItem::Park => dispatch(plan_park(&self.map, &self.config, robot)),
            MenuItem::ComputeOptimalFlow => match self.optimizer.suggest_target(&self.map, robot) {
                Ok(landmark) => dispatch(plan_to_landmark(&self.map, &self.config, robot, &landmark)),
                Err(e) => InterpreterResponse::Rejected { reason: e.to_string() },
            },
            MenuItem::Anchor => InterpreterResponse::Dispatched { commands: alloc::vec![RoboticCommand::Anchor] },
            MenuItem::Release => {
                InterpreterResponse::Dispatched { commands: alloc::vec![RoboticCommand::ReleaseAnchor] }
            }
        }
    }
}

fn dispatch(plan: Result<Plan, PlanError>) -> InterpreterResponse {
    match plan {
        Ok(p) => InterpreterResponse::Dispatched { commands: p.commands },
        Err(e) => InterpreterResponse::Rejected { reason: e.to_string() },
    }
}

/// Convenience for tests and tools: the MoveTo targets of a response.
pub fn move_targets(resp: &InterpreterResponse) -> Vec<GeoCoordinate> {
    match resp {
        InterpreterResponse::Dispatched { commands } => commands
            .iter()
            .filter_map(|c| match c {
                RoboticCommand::MoveTo { target, .. } => Some(*target),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}
