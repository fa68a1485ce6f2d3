//! Metric graphs: vertices glued together by intervals of positive length.
//!
//! Bounded edges are parametrized by `[0, length]` from tail to head. A
//! half-line has no head; it is parametrized by `[0, +inf)` starting at its
//! tail vertex. Loops (tail = head) and parallel edges are allowed.

mod builders;
mod distance;
mod document;

pub use builders::{circle, four_star, interval, star_graph, tadpole, three_bridge};
pub use distance::{distance, distance_to_set, DistanceField};
pub use document::{load_graph, GraphDocument};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to snap edge coordinates onto endpoints.
pub const SNAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Which end of an edge touches a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndRole {
    Tail,
    Head,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub name: String,
    pub tail: VertexId,
    /// `None` for a half-line.
    pub head: Option<VertexId>,
    /// `f64::INFINITY` for a half-line.
    pub length: f64,
}

impl Edge {
    pub fn is_half_line(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_bounded(&self) -> bool {
        self.head.is_some()
    }

    pub fn is_loop(&self) -> bool {
        self.head == Some(self.tail)
    }

    /// Vertex sitting at the given end.
    pub fn end_vertex(&self, role: EndRole) -> Option<VertexId> {
        match role {
            EndRole::Tail => Some(self.tail),
            EndRole::Head => self.head,
        }
    }
}

/// A finite, connected metric graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(EdgeId, EndRole)>>,
}

impl MetricGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    /// Incident edge ends at `v`; a loop appears twice (once per end).
    pub fn incident(&self, v: VertexId) -> &[(EdgeId, EndRole)] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn is_compact(&self) -> bool {
        self.edges.iter().all(Edge::is_bounded)
    }

    pub fn half_lines(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_half_line())
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_bounded())
    }

    /// Shortest bounded edge length, `None` if there are no bounded edges.
    pub fn min_bounded_length(&self) -> Option<f64> {
        self.bounded_edges().map(|e| e.length).reduce(f64::min)
    }

    pub fn max_bounded_length(&self) -> Option<f64> {
        self.bounded_edges().map(|e| e.length).reduce(f64::max)
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if let Some(h) = e.head {
                let (a, b) = (find(&mut parent, e.tail.0), find(&mut parent, h.0));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Subgraph made of all bounded edges together with their endpoints.
    pub fn compact_core(&self) -> Result<CompactCore> {
        let kept: Vec<&Edge> = self.bounded_edges().collect();
        if kept.is_empty() {
            return Err(Error::EmptyCore);
        }
        let mut vertex_map: Vec<Option<VertexId>> = vec![None; self.vertex_count()];
        let mut original_vertices = Vec::new();
        let mut builder = GraphBuilder::default();
        for e in &kept {
            for v in [e.tail, e.head.expect("bounded")] {
                if vertex_map[v.0].is_none() {
                    vertex_map[v.0] = Some(VertexId(original_vertices.len()));
                    original_vertices.push(v);
                    builder = builder.vertex(self.vertex_name(v));
                }
            }
        }
        for e in &kept {
            builder = builder.edge(
                &e.name,
                self.vertex_name(e.tail),
                self.vertex_name(e.head.expect("bounded")),
                e.length,
            );
        }
        let graph = builder.build_unchecked_connectivity()?;
        let components = graph.component_count();
        Ok(CompactCore {
            graph,
            edge_map: kept.iter().map(|e| e.id).collect(),
            vertex_map: original_vertices,
            components,
        })
    }

    /// Largest distance between two points, estimated on a grid of
    /// `samples_per_edge` points per bounded edge (half-lines make it infinite).
    pub fn diameter(&self, samples_per_edge: usize) -> f64 {
        if !self.is_compact() {
            return f64::INFINITY;
        }
        let n = samples_per_edge.max(2);
        let points: Vec<GraphPoint> = self
            .edges
            .iter()
            .flat_map(|e| {
                (0..n).map(move |j| GraphPoint {
                    edge: e.id,
                    s: e.length * j as f64 / (n - 1) as f64,
                })
            })
            .collect();
        let mut best: f64 = 0.0;
        for a in &points {
            let field = DistanceField::new(self, std::slice::from_ref(a));
            for b in &points {
                best = best.max(field.at(self, *b));
            }
        }
        best
    }
}

/// Compact core of a graph with the correspondence back to the original.
#[derive(Debug, Clone)]
pub struct CompactCore {
    pub graph: MetricGraph,
    /// Core edge index -> original edge.
    pub edge_map: Vec<EdgeId>,
    /// Core vertex index -> original vertex.
    pub vertex_map: Vec<VertexId>,
    pub components: usize,
}

/// A point `s` on edge `edge`, with `0 <= s <= length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub s: f64,
}

impl GraphPoint {
    /// Validated point; coordinates within the snap tolerance of an endpoint
    /// are clamped onto it.
    pub fn new(g: &MetricGraph, edge: EdgeId, s: f64) -> Result<Self> {
        if edge.0 >= g.edge_count() {
            return Err(Error::InvalidPoint(format!("edge {edge} not in graph")));
        }
        let len = g.edge(edge).length;
        let tol = if len.is_finite() {
            SNAP_TOLERANCE * len
        } else {
            SNAP_TOLERANCE
        };
        if !s.is_finite() || s < -tol || s > len + tol {
            return Err(Error::InvalidPoint(format!(
                "coordinate {s} outside [0, {len}] on edge {edge}"
            )));
        }
        let s = if s.abs() <= tol {
            0.0
        } else if len.is_finite() && (s - len).abs() <= tol {
            len
        } else {
            s
        };
        Ok(Self { edge, s })
    }

    /// The point of `g` located at vertex `v`.
    pub fn at_vertex(g: &MetricGraph, v: VertexId) -> Result<Self> {
        let &(edge, role) = g
            .incident(v)
            .first()
            .ok_or_else(|| Error::InvalidPoint(format!("vertex {v} has no incident edge")))?;
        let s = match role {
            EndRole::Tail => 0.0,
            EndRole::Head => g.edge(edge).length,
        };
        Ok(Self { edge, s })
    }

    /// The vertex this point coincides with, if any.
    pub fn vertex(&self, g: &MetricGraph) -> Option<VertexId> {
        let e = g.edge(self.edge);
        if self.s == 0.0 {
            Some(e.tail)
        } else if self.s == e.length {
            e.head
        } else {
            None
        }
    }

    /// Equality after identifying endpoint coordinates with vertices.
    pub fn same_as(&self, g: &MetricGraph, other: &GraphPoint) -> bool {
        match (self.vertex(g), other.vertex(g)) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.edge == other.edge && self.s == other.s,
            _ => false,
        }
    }
}

/// Incremental constructor for [`MetricGraph`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<String>,
    edges: Vec<(String, String, Option<String>, f64)>,
}

impl GraphBuilder {
    pub fn vertex(mut self, name: &str) -> Self {
        self.vertices.push(name.to_string());
        self
    }

    pub fn edge(mut self, name: &str, tail: &str, head: &str, length: f64) -> Self {
        self.edges
            .push((name.to_string(), tail.to_string(), Some(head.to_string()), length));
        self
    }

    pub fn half_line(mut self, name: &str, tail: &str) -> Self {
        self.edges
            .push((name.to_string(), tail.to_string(), None, f64::INFINITY));
        self
    }

    pub fn build(self) -> Result<MetricGraph> {
        let g = self.build_unchecked_connectivity()?;
        if g.component_count() != 1 {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(g)
    }

    /// Same validation as [`GraphBuilder::build`] except connectivity; used for
    /// subgraphs such as compact cores.
    pub(crate) fn build_unchecked_connectivity(self) -> Result<MetricGraph> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, name) in self.vertices.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex '{name}'")));
            }
        }
        let mut seen_edges: HashMap<&str, ()> = HashMap::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut adjacency = vec![Vec::new(); self.vertices.len()];
        for (k, (name, tail, head, length)) in self.edges.iter().enumerate() {
            if seen_edges.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge '{name}'")));
            }
            let lookup = |v: &str| {
                index.get(v).copied().map(VertexId).ok_or_else(|| {
                    Error::InvalidGraph(format!("edge '{name}' references unknown vertex '{v}'"))
                })
            };
            let tail_id = lookup(tail)?;
            let head_id = match head {
                Some(h) => Some(lookup(h)?),
                None => None,
            };
            match head_id {
                Some(_) => {
                    if !(length.is_finite() && *length > 0.0) {
                        return Err(Error::InvalidGraph(format!(
                            "bounded edge '{name}' must have finite positive length, got {length}"
                        )));
                    }
                }
                None => {
                    if *length != f64::INFINITY {
                        return Err(Error::InvalidGraph(format!(
                            "half-line '{name}' must have infinite length"
                        )));
                    }
                }
            }
            let id = EdgeId(k);
            adjacency[tail_id.0].push((id, EndRole::Tail));
            if let Some(h) = head_id {
                adjacency[h.0].push((id, EndRole::Head));
            }
            edges.push(Edge {
                id,
                name: name.clone(),
                tail: tail_id,
                head: head_id,
                length: *length,
            });
        }
        Ok(MetricGraph {
            vertex_names: self.vertices,
            edges,
            adjacency,
        })
    }
}
