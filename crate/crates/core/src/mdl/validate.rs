use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::error::{Rule, Span, ValidationError};
use super::model::{LandmarkKind, MapDocument, MdlFile};

/// Element positions, index-aligned with the document lists as parsed.
#[derive(Debug, Default)]
pub(crate) struct SourceMap {
    pub regions: Vec<Span>,
    pub landmarks: Vec<Span>,
    pub flows: Vec<Span>,
    pub annotations: Vec<Span>,
}

/// `[A-Za-z0-9_-]+`
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Checks every map and annotation invariant, reporting all violations.
pub fn validate(file: &MdlFile) -> Result<(), Vec<ValidationError>> {
    validate_with_spans(file, None)
}

/// Checks the map alone.
pub fn validate_map(map: &MapDocument) -> Result<(), Vec<ValidationError>> {
    let mut out = Vec::new();
    check_map(map, None, &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

pub(crate) fn validate_with_spans(file: &MdlFile, spans: Option<&SourceMap>) -> Result<(), Vec<ValidationError>> {
    let mut out = Vec::new();
    check_map(&file.map, spans, &mut out);
    check_annotations(file, spans, &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn push(out: &mut Vec<ValidationError>, rule: Rule, id: &str, span: Option<Span>) {
    out.push(ValidationError { rule, offending_id: id.to_string(), span });
}

fn span_of(spans: Option<&[Span]>, i: usize) -> Option<Span> {
    spans.and_then(|s| s.get(i).copied())
}

fn check_ids<'a>(
    ids: impl Iterator<Item = &'a str>,
    spans: Option<&[Span]>,
    out: &mut Vec<ValidationError>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !is_valid_id(id) {
            push(out, Rule::BadId, id, span_of(spans, i));
        } else if !seen.insert(id) {
            push(out, Rule::DuplicateId, id, span_of(spans, i));
        }
    }
    seen
}

fn check_map(map: &MapDocument, spans: Option<&SourceMap>, out: &mut Vec<ValidationError>) {
    let rs = spans.map(|s| s.regions.as_slice());
    let ls = spans.map(|s| s.landmarks.as_slice());
    let fs = spans.map(|s| s.flows.as_slice());

    check_ids(map.scale_regions.iter().map(|r| r.id.as_str()), rs, out);
    for (i, r) in map.scale_regions.iter().enumerate() {
        let b = &r.bounds;
        let corners_ok = [b.south, b.north].iter().all(|v| v.is_finite() && (-90.0..=90.0).contains(v))
            && [b.west, b.east].iter().all(|v| v.is_finite() && (-180.0..=180.0).contains(v));
        if !corners_ok {
            push(out, Rule::BadCoordinate, &r.id, span_of(rs, i));
        } else if b.is_degenerate() {
            push(out, Rule::DegenerateRegion, &r.id, span_of(rs, i));
        }
        if r.scale_denominator == 0 {
            push(out, Rule::BadScale, &r.id, span_of(rs, i));
        }
    }

    let landmark_ids = check_ids(map.landmarks.iter().map(|l| l.id.as_str()), ls, out);
    for (i, l) in map.landmarks.iter().enumerate() {
        if !l.position.is_valid() {
            push(out, Rule::BadCoordinate, &l.id, span_of(ls, i));
        }
    }
    if !map.landmarks.iter().any(|l| l.kind == LandmarkKind::FuelRendezvousTerminal) {
        push(out, Rule::NoFuelTerminal, &map.id, None);
    }

    check_ids(map.flows.iter().map(|f| f.id.as_str()), fs, out);
    for (i, f) in map.flows.iter().enumerate() {
        let span = span_of(fs, i);
        let vectors_ok = [f.v_from.east, f.v_from.north, f.v_to.east, f.v_to.north]
            .iter()
            .all(|v| v.is_finite());
        if !vectors_ok {
            push(out, Rule::BadFlowVector, &f.id, span);
        }
        if f.from_id == f.to_id {
            push(out, Rule::SelfLoopFlow, &f.id, span);
        }
        let dangling = [&f.from_id, &f.to_id]
            .into_iter()
            .chain(f.waypoint_ids.iter())
            .any(|r| !landmark_ids.contains(r.as_str()));
        if dangling {
            push(out, Rule::DanglingRef, &f.id, span);
        }
        if f.waypoint_ids.len() < 2 {
            push(out, Rule::FlowUnderpopulated, &f.id, span);
            continue;
        }
        if f.waypoint_ids.first() != Some(&f.from_id) || f.waypoint_ids.last() != Some(&f.to_id) {
            push(out, Rule::WaypointEndpointMismatch, &f.id, span);
        }
        let distinct: BTreeSet<&String> = f.waypoint_ids.iter().collect();
        if distinct.len() != f.waypoint_ids.len() {
            push(out, Rule::DuplicateWaypoint, &f.id, span);
        }
    }
}

fn check_annotations(file: &MdlFile, spans: Option<&SourceMap>, out: &mut Vec<ValidationError>) {
    let as_ = spans.map(|s| s.annotations.as_slice());
    check_ids(file.annotations.iter().map(|a| a.robot_id.as_str()), as_, out);
    for (i, a) in file.annotations.iter().enumerate() {
        let span = span_of(as_, i);
        let flow_ok = a.active_flow.as_ref().is_none_or(|f| file.map.flow(f).is_some());
        let refs_ok = a
            .landmarks_passed
            .iter()
            .chain(a.lookahead_landmark.iter())
            .all(|l| file.map.landmark(l).is_some());
        if !flow_ok || !refs_ok {
            push(out, Rule::DanglingRef, &a.robot_id, span);
        }
        let distinct: BTreeSet<&String> = a.landmarks_passed.iter().collect();
        let lookahead_passed = a.lookahead_landmark.as_ref().is_some_and(|l| distinct.contains(l));
        if distinct.len() != a.landmarks_passed.len() || lookahead_passed {
            push(out, Rule::InconsistentAnnotation, &a.robot_id, span);
        }
    }
}
