//! Shortest paths over the directed flow graph.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::error::QueryError;
use super::model::MapDocument;
use super::query::flow_length_m;

/// A path through the flow graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// Every landmark visited in order, including the intermediate waypoints
    /// of each traversed flow. Starts at the origin and ends at the
    /// destination.
    pub landmarks: Vec<String>,
    /// Flows traversed, in order.
    pub flows: Vec<String>,
    /// Sum of flow arc lengths, metres.
    pub cost_m: f64,
}

/// Directed adjacency: for each landmark, its outgoing flows as
/// `(flow index, to landmark, arc length)`.
pub struct FlowGraph<'d> {
    doc: &'d MapDocument,
    out: BTreeMap<&'d str, Vec<(usize, &'d str, f64)>>,
}

impl<'d> FlowGraph<'d> {
    pub fn new(doc: &'d MapDocument) -> Self {
        let mut out: BTreeMap<&str, Vec<(usize, &str, f64)>> = BTreeMap::new();
        for (i, f) in doc.flows.iter().enumerate() {
            // Flows with dangling references carry no edge.
            if let Ok(len) = flow_length_m(doc, f) {
                out.entry(f.from_id.as_str()).or_default().push((i, f.to_id.as_str(), len));
            }
        }
        Self { doc, out }
    }

    pub fn edges_from(&self, node: &str) -> &[(usize, &'d str, f64)] {
        self.out.get(node).map_or(&[], Vec::as_slice)
    }

    /// Dijkstra with a total order on `(cost, node path, flow ids)`, so equal
    /// cost paths resolve to the lexicographically smallest next node.
    pub fn shortest(&self, from: &str, to: &str) -> Result<Route, QueryError> {
        for id in [from, to] {
            if self.doc.landmark(id).is_none() {
                return Err(QueryError::UnknownLandmark(id.to_string()));
            }
        }
        let mut settled: BTreeMap<&str, ()> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(Label { cost: 0.0, nodes: alloc::vec![from], flows: Vec::new() });
        while let Some(Label { cost, nodes, flows }) = heap.pop() {
            let here = *nodes.last().expect("labels are never empty");
            if settled.insert(here, ()).is_some() {
                continue;
            }
            if here == to {
                return Ok(self.expand(cost, &flows, from));
            }
            for &(fi, next, len) in self.edges_from(here) {
                if settled.contains_key(next) {
                    continue;
                }
                let mut n = nodes.clone();
                n.push(next);
                let mut f = flows.clone();
                f.push(fi);
                heap.push(Label { cost: cost + len, nodes: n, flows: f });
            }
        }
        Err(QueryError::NoRoute { from: from.to_string(), to: to.to_string() })
    }

    fn expand(&self, cost: f64, flows: &[usize], from: &str) -> Route {
        let mut landmarks = alloc::vec![from.to_string()];
        let mut ids = Vec::with_capacity(flows.len());
        for &fi in flows {
            let f = &self.doc.flows[fi];
            landmarks.extend(f.waypoint_ids.iter().skip(1).cloned());
            ids.push(f.id.clone());
        }
        Route { landmarks, flows: ids, cost_m: cost }
    }
}

struct Label<'a> {
    cost: f64,
    nodes: Vec<&'a str>,
    flows: Vec<usize>,
}

impl<'a> Label<'a> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.nodes.cmp(&other.nodes))
            .then_with(|| self.flows.cmp(&other.flows))
    }
}

impl PartialEq for Label<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Label<'_> {}

impl PartialOrd for Label<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label<'_> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Shortest route between two landmarks over the flow graph, weighted by
/// polyline arc length.
pub fn route_to(doc: &MapDocument, from: &str, to: &str) -> Result<Route, QueryError> {
    FlowGraph::new(doc).shortest(from, to)
}
