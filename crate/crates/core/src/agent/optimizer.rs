use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::planner::nearest_graph_node;
use crate::mdl::route::FlowGraph;
use crate::mdl::{LandmarkKind, MapDocument};
use crate::sim::RobotState;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum OptimizerError {
    #[error("the map has no parking area")]
    NoCandidate,
    #[error("optimizer suggested unknown landmark {0}")]
    UnknownLandmark(String),
}

/// Chooses where a robot should be positioned.
///
/// The returned id must name a landmark of `doc`.
pub trait OptimizerPlugin: Send + Sync {
    fn suggest_target(&self, doc: &MapDocument, robot: &RobotState) -> Result<String, OptimizerError>;
}

/// Nearest parking area; see [`default_optimizer`].
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestParking;

impl OptimizerPlugin for NearestParking {
    fn suggest_target(&self, doc: &MapDocument, robot: &RobotState) -> Result<String, OptimizerError> {
        default_optimizer(doc, robot)
    }
}

/// The parking area with the cheapest route from the robot's nearest graph
/// landmark. When no parking area is reachable, the straight-line nearest one
/// is returned instead. Ties go to the smaller id.
pub fn default_optimizer(doc: &MapDocument, robot: &RobotState) -> Result<String, OptimizerError> {
    let mut candidates: alloc::vec::Vec<_> = doc.landmarks_of_kind(LandmarkKind::ParkingArea).collect();
    if candidates.is_empty() {
        return Err(OptimizerError::NoCandidate);
    }
    candidates.sort_by(|a, b| a.id.cmp(&b.id));
    let graph = FlowGraph::new(doc);
    if let Some(start) = nearest_graph_node(doc, &robot.position) {
        let best = candidates
            .iter()
            .filter_map(|c| graph.shortest(&start, &c.id).ok().map(|r| (r.cost_m, &c.id)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        if let Some((_, id)) = best {
            return Ok(id.to_string());
        }
    }
    let nearest = candidates
        .iter()
        .map(|c| (robot.position.distance_m(&c.position), &c.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .expect("candidates is non-empty");
    Ok(nearest.1.to_string())
}
