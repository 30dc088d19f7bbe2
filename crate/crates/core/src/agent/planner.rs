//! Turns a destination into a sequence of robotic commands that follows
//! the flow graph.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoCoordinate;
use crate::mdl::route::{FlowGraph, Route};
use crate::mdl::{LandmarkKind, MapDocument};
use crate::sim::{RobotState, RoboticCommand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Drops this close to a landmark snap onto it.
    pub snap_radius_m: f64,
    /// Speed requested in every MoveTo.
    pub cruise_speed: f64,
    /// A robot this close to its start landmark does not first move onto it.
    pub arrival_radius_m: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self { snap_radius_m: 50.0, cruise_speed: 2.0, arrival_radius_m: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum PlanError {
    #[error("the map has no flows to navigate")]
    NoGraph,
    #[error("no route from {from} to {to}")]
    NoRoute { from: String, to: String },
    #[error("unknown landmark {0}")]
    UnknownLandmark(String),
}

/// A planned trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub route: Route,
    pub commands: Vec<RoboticCommand>,
}

/// Landmarks that are endpoints of at least one flow.
pub fn graph_nodes(doc: &MapDocument) -> BTreeSet<&str> {
    doc.flows.iter().flat_map(|f| [f.from_id.as_str(), f.to_id.as_str()]).collect()
}

/// The flow-graph landmark closest to `p` in a straight line, ties by id.
pub fn nearest_graph_node(doc: &MapDocument, p: &GeoCoordinate) -> Option<String> {
    nearest_node_with_distance(doc, p).map(|(id, _)| id)
}

fn nearest_node_with_distance(doc: &MapDocument, p: &GeoCoordinate) -> Option<(String, f64)> {
    graph_nodes(doc)
        .into_iter()
        .filter_map(|id| doc.landmark(id).map(|l| (id, p.distance_m(&l.position))))
        // graph_nodes iterates in id order, so strict `<` keeps the smaller id.
        .fold(None, |best: Option<(&str, f64)>, (id, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((id, d)),
        })
        .map(|(id, d)| (id.to_string(), d))
}

fn commands_for(doc: &MapDocument, cfg: &AgentConfig, robot: &RobotState, route: &Route) -> Vec<RoboticCommand> {
    let mut cmds = Vec::new();
    if robot.anchored {
        cmds.push(RoboticCommand::ReleaseAnchor);
    }
    let mut legs = route.landmarks.iter().filter_map(|id| doc.landmark(id)).peekable();
    if let Some(start) = legs.peek() {
        if robot.position.distance_m(&start.position) <= cfg.arrival_radius_m {
            legs.next();
        }
    }
    cmds.extend(legs.map(|l| RoboticCommand::MoveTo { target: l.position, speed: cfg.cruise_speed }));
    cmds
}

/// Route from the robot's nearest graph landmark to `landmark`.
pub fn plan_to_landmark(
    doc: &MapDocument,
    cfg: &AgentConfig,
    robot: &RobotState,
    landmark: &str,
) -> Result<Plan, PlanError> {
    if doc.landmark(landmark).is_none() {
        return Err(PlanError::UnknownLandmark(landmark.to_string()));
    }
    let start = nearest_graph_node(doc, &robot.position).ok_or(PlanError::NoGraph)?;
    let route = FlowGraph::new(doc)
        .shortest(&start, landmark)
        .map_err(|_| PlanError::NoRoute { from: start.clone(), to: landmark.to_string() })?;
    let commands = commands_for(doc, cfg, robot, &route);
    Ok(Plan { route, commands })
}

/// Route to a free drop point. A drop within the snap radius of a graph
/// landmark goes to that landmark; otherwise the robot routes to the
/// landmark nearest the drop and then crosses to the drop point itself.
pub fn plan_to_point(
    doc: &MapDocument,
    cfg: &AgentConfig,
    robot: &RobotState,
    drop: &GeoCoordinate,
) -> Result<Plan, PlanError> {
    let (near, d) = nearest_node_with_distance(doc, drop).ok_or(PlanError::NoGraph)?;
    let mut plan = plan_to_landmark(doc, cfg, robot, &near)?;
    if d > cfg.snap_radius_m {
        plan.commands.push(RoboticCommand::MoveTo { target: *drop, speed: cfg.cruise_speed });
    }
    Ok(plan)
}

/// Route to the fuel rendezvous terminal with the cheapest route (ties by
/// id), ending with a `Park`.
pub fn plan_park(doc: &MapDocument, cfg: &AgentConfig, robot: &RobotState) -> Result<Plan, PlanError> {
    let start = nearest_graph_node(doc, &robot.position).ok_or(PlanError::NoGraph)?;
    let graph = FlowGraph::new(doc);
    let mut terminals: Vec<&str> =
        doc.landmarks_of_kind(LandmarkKind::FuelRendezvousTerminal).map(|l| l.id.as_str()).collect();
    terminals.sort_unstable();
    let route = terminals
        .iter()
        .filter_map(|t| graph.shortest(&start, t).ok())
        .min_by(|a, b| a.cost_m.total_cmp(&b.cost_m).then_with(|| a.landmarks.last().cmp(&b.landmarks.last())))
        .ok_or_else(|| PlanError::NoRoute {
            from: start.clone(),
            to: terminals.first().map_or_else(String::new, |t| t.to_string()),
        })?;
    let terminal = route.landmarks.last().cloned().unwrap_or_default();
    let mut commands = commands_for(doc, cfg, robot, &route);
    commands.push(RoboticCommand::Park { terminal });
    Ok(Plan { route, commands })
}

/// Straight-line fallback: the physically nearest fuel terminal, direct.
pub fn plan_park_direct(doc: &MapDocument, cfg: &AgentConfig, robot: &RobotState) -> Option<Vec<RoboticCommand>> {
    let t = doc
        .landmarks_of_kind(LandmarkKind::FuelRendezvousTerminal)
        .map(|l| (robot.position.distance_m(&l.position), l))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)))?
        .1;
    let mut cmds = Vec::new();
    if robot.anchored {
        cmds.push(RoboticCommand::ReleaseAnchor);
    }
    cmds.push(RoboticCommand::MoveTo { target: t.position, speed: cfg.cruise_speed });
    cmds.push(RoboticCommand::Park { terminal: t.id.clone() });
    Some(cmds)
}
