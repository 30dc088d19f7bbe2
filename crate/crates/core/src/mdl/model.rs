use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::{GeoCoordinate, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkKind {
    Marker,
    FlowObstacle,
    StaticObstacle,
    ParkingArea,
    FuelRendezvousTerminal,
}

impl LandmarkKind {
    pub const ALL: [LandmarkKind; 5] = [
        LandmarkKind::Marker,
        LandmarkKind::FlowObstacle,
        LandmarkKind::StaticObstacle,
        LandmarkKind::ParkingArea,
        LandmarkKind::FuelRendezvousTerminal,
    ];

    /// Canonical attribute value.
    pub fn as_str(self) -> &'static str {
        match self {
            LandmarkKind::Marker => "marker",
            LandmarkKind::FlowObstacle => "flow_obstacle",
            LandmarkKind::StaticObstacle => "static_obstacle",
            LandmarkKind::ParkingArea => "parking_area",
            LandmarkKind::FuelRendezvousTerminal => "fuel_rendezvous_terminal",
        }
    }

    /// Parses a kind attribute. The legacy markup names
    /// (`Coordinates_markers`, `Coordinates_flow_obstacles`, `Flow_obstacles`)
    /// are accepted as aliases and normalize to the canonical kind.
    pub fn from_attr(s: &str) -> Option<Self> {
        Some(match s {
            "marker" | "Coordinates_markers" => LandmarkKind::Marker,
            "flow_obstacle" | "Flow_obstacles" | "Coordinates_flow_obstacles" => {
                LandmarkKind::FlowObstacle
            }
            "static_obstacle" => LandmarkKind::StaticObstacle,
            "parking_area" => LandmarkKind::ParkingArea,
            "fuel_rendezvous_terminal" => LandmarkKind::FuelRendezvousTerminal,
            _ => return None,
        })
    }

    /// Kinds a robot may be parked at.
    pub fn is_parking(self) -> bool {
        matches!(self, LandmarkKind::ParkingArea | LandmarkKind::FuelRendezvousTerminal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub id: String,
    pub kind: LandmarkKind,
    pub position: GeoCoordinate,
    pub label: String,
}

/// A directed polyline between two landmarks carrying a linearly varying
/// water-flow vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSegment {
    pub id: String,
    pub from_id: String,
    pub to_id: String,
    /// Ordered, endpoints included.
    pub waypoint_ids: Vec<String>,
    pub v_from: Vec2,
    pub v_to: Vec2,
}

/// Axis-aligned lat/lon rectangle, inclusive on every edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub south: f64,
    pub west: f64,
    pub north: f64,
    pub east: f64,
}

impl GeoBounds {
    pub fn contains(&self, p: &GeoCoordinate) -> bool {
        p.lat >= self.south && p.lat <= self.north && p.lon >= self.west && p.lon <= self.east
    }

    /// Area proportional to square metres (degree area scaled by the cosine
    /// of the mid latitude).
    pub fn area(&self) -> f64 {
        let mid = (self.south + self.north) * 0.5 * core::f64::consts::PI / 180.0;
        (self.north - self.south) * (self.east - self.west) * libm::cos(mid)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.north > self.south && self.east > self.west)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRegion {
    pub id: String,
    pub bounds: GeoBounds,
    /// The `N` of a `1:N` map scale.
    pub scale_denominator: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapDocument {
    pub id: String,
    pub name: String,
    pub landmarks: Vec<Landmark>,
    pub flows: Vec<FlowSegment>,
    pub scale_regions: Vec<ScaleRegion>,
}

impl MapDocument {
    pub fn landmark(&self, id: &str) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.id == id)
    }

    pub fn flow(&self, id: &str) -> Option<&FlowSegment> {
        self.flows.iter().find(|f| f.id == id)
    }

    pub fn landmarks_of_kind(&self, kind: LandmarkKind) -> impl Iterator<Item = &Landmark> {
        self.landmarks.iter().filter(move |l| l.kind == kind)
    }

    /// Sorts every list by id, the order used by the canonical serializer.
    pub fn canonicalize(&mut self) {
        self.landmarks.sort_by(|a, b| a.id.cmp(&b.id));
        self.flows.sort_by(|a, b| a.id.cmp(&b.id));
        self.scale_regions.sort_by(|a, b| a.id.cmp(&b.id));
    }

    /// Positions of a flow's waypoints, or `None` if any reference dangles.
    pub fn waypoint_positions(&self, flow: &FlowSegment) -> Option<Vec<GeoCoordinate>> {
        flow.waypoint_ids
            .iter()
            .map(|id| self.landmark(id).map(|l| l.position))
            .collect()
    }
}

/// Per-robot dynamic markup: where the robot is relative to its active flow.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MdlAnnotation {
    pub robot_id: String,
    pub landmarks_passed: Vec<String>,
    pub lookahead_landmark: Option<String>,
    pub active_flow: Option<String>,
}

/// A parsed MDL file: the static map plus any robot annotations it carries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MdlFile {
    pub map: MapDocument,
    pub annotations: Vec<MdlAnnotation>,
}
