//! Geometric queries over a validated map.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::error::QueryError;
use super::model::{FlowSegment, MapDocument, MdlAnnotation};
use crate::geo::{GeoCoordinate, LocalFrame, Vec2};

/// Default corridor half-width for [`annotate_for_robot`] and ambient drift.
pub const DEFAULT_CORRIDOR_M: f64 = 100.0;

/// Scale of the smallest-area region containing `p`. Ties go to the smaller
/// scale denominator, then the lexicographically smaller region id.
pub fn query_scale(doc: &MapDocument, p: &GeoCoordinate) -> Result<u64, QueryError> {
    doc.scale_regions
        .iter()
        .filter(|r| r.bounds.contains(p))
        .min_by(|a, b| {
            a.bounds
                .area()
                .total_cmp(&b.bounds.area())
                .then(a.scale_denominator.cmp(&b.scale_denominator))
                .then_with(|| a.id.cmp(&b.id))
        })
        .map(|r| r.scale_denominator)
        .ok_or(QueryError::NoScaleRegion)
}

/// Flow vector at fraction `t` along a segment: `(1 - t)·v_from + t·v_to`.
pub fn flow_at(doc: &MapDocument, flow_id: &str, t: f64) -> Result<Vec2, QueryError> {
    let flow = doc.flow(flow_id).ok_or_else(|| QueryError::UnknownFlow(flow_id.to_string()))?;
    if !(0.0..=1.0).contains(&t) {
        return Err(QueryError::OutOfRange(t));
    }
    Ok(flow.v_from.lerp(flow.v_to, t))
}

/// A flow's waypoint polyline laid out in its local plane.
#[derive(Debug, Clone)]
pub struct FlowGeometry {
    frame: LocalFrame,
    points: Vec<Vec2>,
    /// Arc length from the first waypoint to each waypoint, metres.
    cumulative: Vec<f64>,
}

/// Closest point on a flow polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Arc-length fraction in `[0, 1]`.
    pub t: f64,
    /// Arc length from the start, metres.
    pub arc_m: f64,
    /// Distance from the query point to the polyline, metres.
    pub distance_m: f64,
}

impl FlowGeometry {
    pub fn new(doc: &MapDocument, flow: &FlowSegment) -> Result<Self, QueryError> {
        let positions = doc
            .waypoint_positions(flow)
            .ok_or_else(|| QueryError::UnknownFlow(flow.id.clone()))?;
        if positions.is_empty() {
            return Err(QueryError::UnknownFlow(flow.id.clone()));
        }
        let frame = LocalFrame::about(&positions);
        let points: Vec<Vec2> = positions.iter().map(|p| frame.to_plane(p)).collect();
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Ok(Self { frame, points, cumulative })
    }

    pub fn length_m(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Arc length of each waypoint.
    pub fn waypoint_arcs(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn frame(&self) -> &LocalFrame {
        &self.frame
    }

    pub fn project(&self, p: &GeoCoordinate) -> Projection {
        let q = self.frame.to_plane(p);
        let mut best = Projection { t: 0.0, arc_m: 0.0, distance_m: (q - self.points[0]).norm() };
        for (i, w) in self.points.windows(2).enumerate() {
            let seg = w[1] - w[0];
            let len2 = seg.dot(seg);
            let s = if len2 > 0.0 { ((q - w[0]).dot(seg) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let closest = w[0] + seg * s;
            let d = (q - closest).norm();
            // Strict comparison keeps the earliest arc on ties.
            if d < best.distance_m {
                let arc = self.cumulative[i] + s * (self.cumulative[i + 1] - self.cumulative[i]);
                best = Projection { t: 0.0, arc_m: arc, distance_m: d };
            }
        }
        let total = self.length_m();
        best.t = if total > 0.0 { (best.arc_m / total).clamp(0.0, 1.0) } else { 0.0 };
        best
    }
}

/// Arc-length fraction and perpendicular distance of `p` against a flow's
/// polyline.
pub fn project_onto_flow(doc: &MapDocument, flow_id: &str, p: &GeoCoordinate) -> Result<(f64, f64), QueryError> {
    let flow = doc.flow(flow_id).ok_or_else(|| QueryError::UnknownFlow(flow_id.to_string()))?;
    let pr = FlowGeometry::new(doc, flow)?.project(p);
    Ok((pr.t, pr.distance_m))
}

/// Polyline arc length of a flow in metres.
pub fn flow_length_m(doc: &MapDocument, flow: &FlowSegment) -> Result<f64, QueryError> {
    Ok(FlowGeometry::new(doc, flow)?.length_m())
}

/// Landmarks passed and the lookahead landmark for a robot at `p` on a flow.
///
/// A waypoint counts as passed once the robot's projected arc length reaches
/// it, so the start landmark is passed immediately and passed/lookahead
/// partition the waypoints.
pub fn annotate_for_robot(
    doc: &MapDocument,
    robot_id: &str,
    flow_id: &str,
    p: &GeoCoordinate,
    corridor_m: f64,
) -> Result<MdlAnnotation, QueryError> {
    if corridor_m.is_nan() || corridor_m <= 0.0 {
        return Err(QueryError::BadCorridor);
    }
    let flow = doc.flow(flow_id).ok_or_else(|| QueryError::UnknownFlow(flow_id.to_string()))?;
    let geom = FlowGeometry::new(doc, flow)?;
    let pr = geom.project(p);
    if pr.distance_m > corridor_m {
        return Err(QueryError::OffRoute { distance: pr.distance_m });
    }
    let mut passed: Vec<String> = Vec::new();
    let mut lookahead = None;
    for (id, arc) in flow.waypoint_ids.iter().zip(geom.waypoint_arcs()) {
        if *arc <= pr.arc_m {
            passed.push(id.clone());
        } else {
            lookahead = Some(id.clone());
            break;
        }
    }
    Ok(MdlAnnotation {
        robot_id: robot_id.to_string(),
        landmarks_passed: passed,
        lookahead_landmark: lookahead,
        active_flow: Some(flow_id.to_string()),
    })
}

/// Flow nearest to `p` (ties by flow id) together with its projection.
pub fn nearest_flow<'d>(doc: &'d MapDocument, p: &GeoCoordinate) -> Option<(&'d FlowSegment, Projection)> {
    let mut best: Option<(&FlowSegment, Projection)> = None;
    for f in &doc.flows {
        let Ok(g) = FlowGeometry::new(doc, f) else { continue };
        let pr = g.project(p);
        let better = match &best {
            None => true,
            Some((bf, bp)) => pr.distance_m < bp.distance_m || (pr.distance_m == bp.distance_m && f.id < bf.id),
        };
        if better {
            best = Some((f, pr));
        }
    }
    best
}
