#![allow(dead_code)]

use proptest::prelude::*;
use riverhelm_core::geo::{GeoCoordinate, Vec2};
use riverhelm_core::mdl::{
    quantize_degrees, FlowSegment, GeoBounds, Landmark, LandmarkKind, MapDocument, MdlAnnotation, ScaleRegion,
};

pub const KINDS: [LandmarkKind; 5] = [
    LandmarkKind::Marker,
    LandmarkKind::FlowObstacle,
    LandmarkKind::StaticObstacle,
    LandmarkKind::ParkingArea,
    LandmarkKind::FuelRendezvousTerminal,
];

pub fn landmark(id: &str, kind: LandmarkKind, lat: f64, lon: f64) -> Landmark {
    Landmark { id: id.into(), kind, position: GeoCoordinate::new(lat, lon), label: String::new() }
}

pub fn flow(id: &str, waypoints: &[&str], v_from: Vec2, v_to: Vec2) -> FlowSegment {
    FlowSegment {
        id: id.into(),
        from_id: waypoints[0].into(),
        to_id: waypoints[waypoints.len() - 1].into(),
        waypoint_ids: waypoints.iter().map(|s| s.to_string()).collect(),
        v_from,
        v_to,
    }
}

pub fn region(id: &str, south: f64, west: f64, north: f64, east: f64, scale: u64) -> ScaleRegion {
    ScaleRegion { id: id.into(), bounds: GeoBounds { south, west, north, east }, scale_denominator: scale }
}

fn deg(range: core::ops::Range<f64>) -> impl Strategy<Value = f64> {
    range.prop_map(quantize_degrees)
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -5.0f64..5.0, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[a-zA-Z0-9 &<>\"'\\n\\té]{0,12}"]
}

prop_compose! {
    fn arb_landmark(i: usize)(
        kind in prop::sample::select(KINDS.to_vec()),
        lat in deg(-60.0..60.0),
        lon in deg(-170.0..170.0),
        depth in prop_oneof![Just(0.0), 0.0f64..50.0],
        label in label(),
    ) -> Landmark {
        Landmark { id: format!("L{i}"), kind, position: GeoCoordinate::with_depth(lat, lon, depth), label }
    }
}

prop_compose! {
    fn arb_region(i: usize)(
        south in deg(-60.0..0.0), west in deg(-170.0..0.0),
        h in deg(0.001..60.0), w in deg(0.001..170.0),
        scale in 1u64..10_000_000,
    ) -> ScaleRegion {
        region(&format!("R{i}"), south, west, quantize_degrees(south + h), quantize_degrees(west + w), scale)
    }
}

/// Valid maps with 2..10 landmarks, at least one fuel terminal, flows over
/// distinct waypoints and a few scale regions.
pub fn arb_map() -> impl Strategy<Value = MapDocument> {
    (2usize..10, 0usize..4)
        .prop_flat_map(|(n, r)| {
            let lms: Vec<_> = (0..n).map(arb_landmark).collect();
            let regions: Vec<_> = (0..r).map(arb_region).collect();
            let flows = prop::collection::vec(
                (prop::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=n.min(5)), any::<bool>(), finite(), finite(), finite(), finite()),
                0..6,
            );
            (lms, regions, flows, "[A-Za-z0-9_-]{1,8}", label())
        })
        .prop_map(|(mut landmarks, scale_regions, flows, id, name)| {
            if !landmarks.iter().any(|l| l.kind == LandmarkKind::FuelRendezvousTerminal) {
                landmarks[0].kind = LandmarkKind::FuelRendezvousTerminal;
            }
            let flows = flows
                .into_iter()
                .enumerate()
                .map(|(i, (mut idx, rev, a, b, c, d))| {
                    if rev {
                        idx.reverse();
                    }
                    let ids: Vec<String> = idx.iter().map(|k| format!("L{k}")).collect();
                    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                    flow(&format!("F{i}"), &refs, Vec2::new(a, b), Vec2::new(c, d))
                })
                .collect();
            let mut doc = MapDocument { id, name, landmarks, flows, scale_regions };
            doc.canonicalize();
            doc
        })
}

/// Annotations that reference only what `doc` contains.
pub fn arb_annotations(doc: &MapDocument) -> impl Strategy<Value = Vec<MdlAnnotation>> {
    let lms: Vec<String> = doc.landmarks.iter().map(|l| l.id.clone()).collect();
    let flows: Vec<String> = doc.flows.iter().map(|f| f.id.clone()).collect();
    let one = (prop::sample::subsequence(lms.clone(), 0..=lms.len()), any::<prop::sample::Index>(), any::<bool>(), any::<prop::sample::Index>(), any::<bool>());
    prop::collection::vec(one, 0..3).prop_map(move |v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (passed, la, has_la, fl, has_fl))| {
                let rest: Vec<&String> = lms.iter().filter(|l| !passed.contains(l)).collect();
                MdlAnnotation {
                    robot_id: format!("robot-{i}"),
                    lookahead_landmark: (has_la && !rest.is_empty()).then(|| la.get(&rest).to_string()),
                    active_flow: (has_fl && !flows.is_empty()).then(|| fl.get(&flows).clone()),
                    landmarks_passed: passed,
                }
            })
            .collect()
    })
}
