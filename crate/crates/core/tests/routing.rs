mod common;

use common::*;
use proptest::prelude::*;
use riverhelm_core::geo::Vec2;
use riverhelm_core::mdl::query::flow_length_m;
use riverhelm_core::mdl::{route_to, LandmarkKind, MapDocument, QueryError};

fn arb_graph() -> impl Strategy<Value = MapDocument> {
    (2usize..=10)
        .prop_flat_map(|n| {
            let pos = prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), n);
            let edges = prop::collection::vec((0..n, 0..n, prop::option::of(0..n)), 0..(3 * n));
            (pos, edges)
        })
        .prop_map(|(pos, edges)| {
            let mut doc = MapDocument::default();
            for (i, (la, lo)) in pos.iter().enumerate() {
                doc.landmarks.push(landmark(&format!("N{i}"), LandmarkKind::Marker, 30.0 + la, 10.0 + lo));
            }
            doc.landmarks[0].kind = LandmarkKind::FuelRendezvousTerminal;
            for (k, (a, b, via)) in edges.into_iter().enumerate() {
                if a == b {
                    continue;
                }
                let (na, nb) = (format!("N{a}"), format!("N{b}"));
                let mut wps = vec![na.as_str()];
                let nv;
                if let Some(v) = via.filter(|v| *v != a && *v != b) {
                    nv = format!("N{v}");
                    wps.push(&nv);
                }
                wps.push(&nb);
                doc.flows.push(flow(&format!("E{k:02}"), &wps, Vec2::ZERO, Vec2::ZERO));
            }
            doc.canonicalize();
            doc
        })
}

/// Minimum cost over every simple path, summing flow lengths in path order.
fn exhaustive(doc: &MapDocument, from: &str, to: &str) -> Option<f64> {
    fn go(doc: &MapDocument, at: &str, to: &str, seen: &mut Vec<String>, cost: f64, best: &mut Option<f64>) {
        if at == to {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for f in doc.flows.iter().filter(|f| f.from_id == at) {
            if seen.contains(&f.to_id) {
                continue;
            }
            let len = flow_length_m(doc, f).unwrap();
            seen.push(f.to_id.clone());
            go(doc, &f.to_id, to, seen, cost + len, best);
            seen.pop();
        }
    }
    let mut best = None;
    go(doc, from, to, &mut vec![from.to_string()], 0.0, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn route_cost_equals_exhaustive_minimum(doc in arb_graph(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let from = &doc.landmarks[a.index(doc.landmarks.len())].id;
        let to = &doc.landmarks[b.index(doc.landmarks.len())].id;
        match (route_to(&doc, from, to), exhaustive(&doc, from, to)) {
            (Ok(r), Some(best)) => {
                prop_assert_eq!(r.cost_m, best);
                prop_assert_eq!(r.landmarks.first(), Some(from));
                prop_assert_eq!(r.landmarks.last(), Some(to));
                // Each traversed flow starts where the previous one ended.
                let mut at = from.clone();
                let mut sum = 0.0;
                for fid in &r.flows {
                    let f = doc.flow(fid).unwrap();
                    prop_assert_eq!(&f.from_id, &at);
                    at = f.to_id.clone();
                    sum += flow_length_m(&doc, f).unwrap();
                }
                prop_assert_eq!(sum, r.cost_m);
            }
            (Err(QueryError::NoRoute { .. }), None) => {}
            (got, want) => prop_assert!(false, "route {:?} vs oracle {:?}", got, want),
        }
    }
}
