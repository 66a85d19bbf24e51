//! Weighted locally finite graphs, regions with boundary, and hop distance.
//!
//! A [`WeightedGraph`] is finite, simple and connected with symmetric
//! positive weights `μ_xy`. Vertex ids are opaque `u64`s; internally the
//! vertices are stored in ascending id order, so "index order" and "id order"
//! coincide and every neighbour sum runs id-ascending.
//!
//! Graphs produced by generators are finite truncations of infinite graphs.
//! Their outermost vertices are marked *truncated*: their stored
//! neighbourhood is incomplete, so no operator may be evaluated there and
//! they never enter a region interior.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub x: VertexId,
    pub y: VertexId,
    pub weight: f64,
}

impl Edge {
    pub fn new(x: VertexId, y: VertexId, weight: f64) -> Self {
        Self { x, y, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Loop { vertex: VertexId },
    DuplicateEdge { x: VertexId, y: VertexId },
    NonpositiveWeight { x: VertexId, y: VertexId, weight: f64 },
    Asymmetric { x: VertexId, y: VertexId },
    DegreeMismatch { vertex: VertexId },
    IsolatedVertex { vertex: VertexId },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Loop { vertex } => write!(f, "loop at vertex {vertex}"),
            Violation::DuplicateEdge { x, y } => write!(f, "duplicate edge ({x},{y})"),
            Violation::NonpositiveWeight { x, y, weight } => {
                write!(f, "nonpositive weight {weight} on edge ({x},{y})")
            }
            Violation::Asymmetric { x, y } => write!(f, "asymmetric weight on ({x},{y})"),
            Violation::DegreeMismatch { vertex } => {
                write!(f, "cached degree of {vertex} does not match its neighbour sum")
            }
            Violation::IsolatedVertex { vertex } => write!(f, "isolated vertex {vertex}"),
            Violation::Disconnected { components } => {
                write!(f, "disconnected ({components} components)")
            }
        }
    }
}

impl Violation {
    /// Short category name, e.g. `"nonpositive weight"`.
    pub fn category(&self) -> &'static str {
        match self {
            Violation::Loop { .. } => "loop",
            Violation::DuplicateEdge { .. } => "duplicate edge",
            Violation::NonpositiveWeight { .. } => "nonpositive weight",
            Violation::Asymmetric { .. } => "asymmetry",
            Violation::DegreeMismatch { .. } => "degree mismatch",
            Violation::IsolatedVertex { .. } => "isolated vertex",
            Violation::Disconnected { .. } => "disconnected",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, category: &str) -> bool {
        self.violations.iter().any(|v| v.category() == category)
    }
}

/// Checks a raw vertex/edge description against the graph invariants.
///
/// `vertices` lists vertices that must exist even without edges; every edge
/// endpoint is added implicitly.
pub fn validate_edges(vertices: &[VertexId], edges: &[Edge]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut ids: Vec<VertexId> = vertices.to_vec();
    ids.extend(edges.iter().flat_map(|e| [e.x, e.y]));
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut seen: HashMap<(VertexId, VertexId), ()> = HashMap::new();
    let mut adj = vec![Vec::new(); ids.len()];
    for e in edges {
        if e.x == e.y {
            violations.push(Violation::Loop { vertex: e.x });
            continue;
        }
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            violations.push(Violation::NonpositiveWeight { x: e.x, y: e.y, weight: e.weight });
        }
        let key = (e.x.min(e.y), e.x.max(e.y));
        if seen.insert(key, ()).is_some() {
            violations.push(Violation::DuplicateEdge { x: key.0, y: key.1 });
            continue;
        }
        let (i, j) = (index[&e.x], index[&e.y]);
        adj[i].push(j);
        adj[j].push(i);
    }
    for (i, nb) in adj.iter().enumerate() {
        if nb.is_empty() {
            violations.push(Violation::IsolatedVertex { vertex: ids[i] });
        }
    }
    let components = count_components(ids.len(), |i| adj[i].iter().copied());
    if components > 1 {
        violations.push(Violation::Disconnected { components });
    }
    ValidationReport { violations }
}

fn count_components<I, F>(n: usize, neighbors: F) -> usize
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for w in neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    components
}

/// Finite, simple, connected graph with symmetric positive edge weights.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    truncated: Vec<bool>,
}

impl WeightedGraph {
    /// Builds a graph from its edge list; the vertex set is the set of endpoints.
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::with_vertices(&[], edges)
    }

    pub fn with_vertices(vertices: &[VertexId], edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let edges: Vec<Edge> = edges.into_iter().collect();
        let report = validate_edges(vertices, &edges);
        if !report.is_valid() {
            return Err(Error::InvalidGraph(report.violations));
        }
        let mut ids: Vec<VertexId> = vertices.to_vec();
        ids.extend(edges.iter().flat_map(|e| [e.x, e.y]));
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for e in &edges {
            let (i, j) = (index[&e.x], index[&e.y]);
            adj[i].push((j, e.weight));
            adj[j].push((i, e.weight));
        }
        for nb in &mut adj {
            nb.sort_by_key(|&(j, _)| j);
        }
        let degree = adj.iter().map(|nb| neighbor_sum(nb)).collect();
        let truncated = vec![false; ids.len()];
        Ok(Self { ids, index, adj, degree, truncated })
    }

    /// Marks vertices whose neighbourhood was cut off by a generator.
    pub fn with_truncated(mut self, vertices: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        for v in vertices {
            let i = self.index_of(v)?;
            self.truncated[i] = true;
        }
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.index.contains_key(&x)
    }

    pub fn is_truncated(&self, x: VertexId) -> Result<bool> {
        Ok(self.truncated[self.index_of(x)?])
    }

    /// Vertices whose neighbourhood is complete.
    pub fn complete_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.ids.iter().zip(&self.truncated).filter(|(_, &t)| !t).map(|(&v, _)| v)
    }

    pub fn neighbors(&self, x: VertexId) -> Result<impl Iterator<Item = (VertexId, f64)> + '_> {
        let i = self.index_of(x)?;
        Ok(self.adj[i].iter().map(move |&(j, w)| (self.ids[j], w)))
    }

    pub fn weight(&self, x: VertexId, y: VertexId) -> Option<f64> {
        let (i, j) = (*self.index.get(&x)?, *self.index.get(&y)?);
        self.adj[i].binary_search_by_key(&j, |&(k, _)| k).ok().map(|p| self.adj[i][p].1)
    }

    /// `d_x = Σ_{y~x} μ_xy`.
    pub fn degree(&self, x: VertexId) -> Result<f64> {
        Ok(self.degree[self.index_of(x)?])
    }

    /// `d̂_x = max_{y~x} d_x / μ_xy`, always at least 1.
    pub fn hat_degree(&self, x: VertexId) -> Result<f64> {
        let i = self.index_of(x)?;
        Ok(self.hat_degree_at(i))
    }

    /// Edges with `x < y`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(move |(i, nb)| {
            nb.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| Edge::new(self.ids[i], self.ids[j], w))
        })
    }

    /// Re-checks every stored invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, nb) in self.adj.iter().enumerate() {
            if nb.is_empty() {
                violations.push(Violation::IsolatedVertex { vertex: self.ids[i] });
            }
            for (k, &(j, w)) in nb.iter().enumerate() {
                if i == j {
                    violations.push(Violation::Loop { vertex: self.ids[i] });
                }
                if k > 0 && nb[k - 1].0 == j {
                    violations.push(Violation::DuplicateEdge { x: self.ids[i], y: self.ids[j] });
                }
                if !(w > 0.0 && w.is_finite()) {
                    violations.push(Violation::NonpositiveWeight { x: self.ids[i], y: self.ids[j], weight: w });
                }
                let back = self.adj[j].binary_search_by_key(&i, |&(m, _)| m).ok().map(|p| self.adj[j][p].1);
                if i < j && back != Some(w) {
                    violations.push(Violation::Asymmetric { x: self.ids[i], y: self.ids[j] });
                }
            }
            if neighbor_sum(nb).to_bits() != self.degree[i].to_bits() {
                violations.push(Violation::DegreeMismatch { vertex: self.ids[i] });
            }
        }
        let components = count_components(self.ids.len(), |i| self.adj[i].iter().map(|&(j, _)| j));
        if components > 1 {
            violations.push(Violation::Disconnected { components });
        }
        ValidationReport { violations }
    }

    /// Hop-count distance.
    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<usize> {
        let (i, j) = (self.index_of(x)?, self.index_of(y)?);
        let dist = self.bfs(j);
        dist[i].ok_or(Error::InvalidGraph(vec![Violation::Disconnected { components: 2 }]))
    }

    /// One shortest path from `x` to `y`, both ends included.
    ///
    /// Among all shortest paths this returns the lexicographically smallest
    /// id sequence: each step moves to the smallest-id neighbour that is one
    /// hop closer to `y`.
    pub fn minimizing_path(&self, x: VertexId, y: VertexId) -> Result<Vec<VertexId>> {
        let (i, j) = (self.index_of(x)?, self.index_of(y)?);
        let dist = self.bfs(j);
        let mut here = i;
        let mut remaining = dist[i].ok_or(Error::InvalidGraph(vec![Violation::Disconnected { components: 2 }]))?;
        let mut path = vec![self.ids[here]];
        while remaining > 0 {
            // neighbour lists are id-ascending, so the first hit is the smallest id
            here = self.adj[here]
                .iter()
                .map(|&(k, _)| k)
                .find(|&k| dist[k] == Some(remaining - 1))
                .expect("bfs distances are consistent");
            remaining -= 1;
            path.push(self.ids[here]);
        }
        Ok(path)
    }

    /// Closed ball `{v : d(v, x0) ≤ radius}` minus truncated vertices.
    pub fn ball(&self, x0: VertexId, radius: usize) -> Result<Region<'_>> {
        let c = self.index_of(x0)?;
        if self.truncated[c] {
            return Err(Error::TruncatedNeighborhood(x0));
        }
        let dist = self.bfs(c);
        let interior: Vec<usize> =
            (0..self.ids.len()).filter(|&i| !self.truncated[i] && dist[i].is_some_and(|d| d <= radius)).collect();
        Region::build(self, interior)
    }

    /// Exhaustion ball `{v : d(v, x0) < radius}`, i.e. `ball(x0, radius - 1)`.
    ///
    /// All exhaustion experiments index their regions this way; `radius`
    /// must be at least 1.
    pub fn open_ball(&self, x0: VertexId, radius: usize) -> Result<Region<'_>> {
        if radius == 0 {
            return Err(Error::EmptyRegion);
        }
        self.ball(x0, radius - 1)
    }

    pub fn region_from_interior(&self, interior: &[VertexId]) -> Result<Region<'_>> {
        let mut idx = Vec::with_capacity(interior.len());
        for &v in interior {
            let i = self.index_of(v)?;
            if self.truncated[i] {
                return Err(Error::TruncatedNeighborhood(v));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        idx.dedup();
        Region::build(self, idx)
    }

    pub(crate) fn index_of(&self, x: VertexId) -> Result<usize> {
        self.index.get(&x).copied().ok_or(Error::UnknownVertex(x))
    }

    pub(crate) fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub(crate) fn adj(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub(crate) fn degree_at(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub(crate) fn truncated_at(&self, i: usize) -> bool {
        self.truncated[i]
    }

    pub(crate) fn hat_degree_at(&self, i: usize) -> f64 {
        let d = self.degree[i];
        self.adj[i].iter().map(|&(_, w)| d / w).fold(1.0, f64::max)
    }

    pub(crate) fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.ids.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &(w, _) in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn neighbor_sum(nb: &[(usize, f64)]) -> f64 {
    nb.iter().fold(0.0, |acc, &(_, w)| acc + w)
}

/// An interior vertex set `S` of a host graph together with its boundary
/// `δS = {v ∉ S : v ~ s for some s ∈ S}`.
#[derive(Debug, Clone)]
pub struct Region<'g> {
    graph: &'g WeightedGraph,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    slot: HashMap<usize, usize>,
}

impl<'g> Region<'g> {
    fn build(graph: &'g WeightedGraph, interior: Vec<usize>) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let slot: HashMap<usize, usize> = interior.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let components = count_components(interior.len(), |p| {
            graph.adj[interior[p]].iter().filter_map(|(j, _)| slot.get(j).copied())
        });
        if components > 1 {
            return Err(Error::DisconnectedRegion { components });
        }
        let mut boundary: Vec<usize> = interior
            .iter()
            .flat_map(|&i| graph.adj[i].iter().map(|&(j, _)| j))
            .filter(|j| !slot.contains_key(j))
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        Ok(Self { graph, interior, boundary, slot })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// Interior ids, ascending.
    pub fn interior(&self) -> Vec<VertexId> {
        self.interior.iter().map(|&i| self.graph.ids[i]).collect()
    }

    /// Boundary ids, ascending.
    pub fn boundary(&self) -> Vec<VertexId> {
        self.boundary.iter().map(|&i| self.graph.ids[i]).collect()
    }

    /// `S̄ = S ∪ δS`, ascending.
    pub fn closure(&self) -> Vec<VertexId> {
        let mut all: Vec<usize> = self.interior.iter().chain(&self.boundary).copied().collect();
        all.sort_unstable();
        all.into_iter().map(|i| self.graph.ids[i]).collect()
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.graph.index.get(&x).is_some_and(|i| self.slot.contains_key(i))
    }

    pub fn is_boundary(&self, x: VertexId) -> bool {
        self.graph.index.get(&x).is_some_and(|i| self.boundary.binary_search(i).is_ok())
    }

    /// Position of `x` in the interior ordering.
    pub fn position(&self, x: VertexId) -> Option<usize> {
        self.graph.index.get(&x).and_then(|i| self.slot.get(i).copied())
    }

    pub(crate) fn interior_indices(&self) -> &[usize] {
        &self.interior
    }

    pub(crate) fn slot_of(&self, host_index: usize) -> Option<usize> {
        self.slot.get(&host_index).copied()
    }

    /// Interior degrees `d_x` in interior order.
    pub fn mass(&self) -> Vec<f64> {
        self.interior.iter().map(|&i| self.graph.degree[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u64) -> WeightedGraph {
        WeightedGraph::from_edges((0..n - 1).map(|i| Edge::new(i, i + 1, 1.0))).unwrap()
    }

    #[test]
    fn p3_is_valid() {
        assert!(path(3).validate().is_valid());
    }

    #[test]
    fn negative_weight_is_a_violation() {
        let r = validate_edges(&[], &[Edge::new(0, 1, -1.0), Edge::new(1, 2, 1.0)]);
        assert!(r.has("nonpositive weight"));
        assert!(matches!(
            WeightedGraph::from_edges([Edge::new(0, 1, -1.0), Edge::new(1, 2, 1.0)]),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn disjoint_edges_are_disconnected() {
        let r = validate_edges(&[], &[Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0)]);
        assert!(r.has("disconnected"));
    }

    #[test]
    fn loops_duplicates_and_isolated_vertices() {
        let r = validate_edges(&[7], &[Edge::new(0, 0, 1.0), Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]);
        assert!(r.has("loop"));
        assert!(r.has("duplicate edge"));
        assert!(r.has("isolated vertex"));
    }

    #[test]
    fn degrees_and_hat_degrees() {
        let g = path(3);
        assert_eq!(g.degree(1).unwrap(), 2.0);
        assert_eq!(g.hat_degree(1).unwrap(), 2.0);
        assert_eq!(g.degree(0).unwrap(), 1.0);
        assert_eq!(g.hat_degree(0).unwrap(), 1.0);
        let star = WeightedGraph::from_edges((1..=3).map(|i| Edge::new(0, i, 1.0))).unwrap();
        assert_eq!(star.degree(0).unwrap(), 3.0);
        assert_eq!(star.hat_degree(0).unwrap(), 3.0);
        assert!(matches!(g.degree(9), Err(Error::UnknownVertex(9))));
    }

    #[test]
    fn distances_and_paths() {
        let p4 = path(4);
        assert_eq!(p4.distance(0, 3).unwrap(), 3);
        assert_eq!(p4.minimizing_path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        let p3 = path(3);
        assert_eq!(p3.distance(1, 1).unwrap(), 0);
        assert_eq!(p3.minimizing_path(1, 1).unwrap(), vec![1]);
        let c4 = WeightedGraph::from_edges([
            Edge::new(0, 1, 1.0),
            Edge::new(1, 2, 1.0),
            Edge::new(2, 3, 1.0),
            Edge::new(3, 0, 1.0),
        ])
        .unwrap();
        assert_eq!(c4.distance(0, 2).unwrap(), 2);
        assert_eq!(c4.minimizing_path(0, 2).unwrap(), vec![0, 1, 2]);
        assert!(matches!(c4.distance(0, 5), Err(Error::UnknownVertex(5))));
    }

    #[test]
    fn balls_and_regions() {
        let p4 = path(4);
        let b = p4.ball(1, 1).unwrap();
        assert_eq!(b.interior(), vec![0, 1, 2]);
        assert_eq!(b.boundary(), vec![3]);
        let r = p4.region_from_interior(&[1, 2]).unwrap();
        assert_eq!(r.boundary(), vec![0, 3]);
        assert!(matches!(p4.region_from_interior(&[1, 3]), Err(Error::DisconnectedRegion { .. })));
        assert!(matches!(p4.region_from_interior(&[]), Err(Error::EmptyRegion)));
        let p3 = path(3);
        assert_eq!(p3.region_from_interior(&[1]).unwrap().boundary(), vec![0, 2]);
        assert!(matches!(p4.ball(9, 1), Err(Error::UnknownVertex(9))));
    }

    #[test]
    fn truncated_vertices_stay_out_of_interiors() {
        let g = path(5).with_truncated([0, 4]).unwrap();
        let b = g.ball(2, 5).unwrap();
        assert_eq!(b.interior(), vec![1, 2, 3]);
        assert_eq!(b.boundary(), vec![0, 4]);
        assert!(matches!(g.region_from_interior(&[0, 1]), Err(Error::TruncatedNeighborhood(0))));
    }

    #[test]
    fn open_ball_is_closed_ball_of_smaller_radius() {
        let g = path(9);
        assert_eq!(g.open_ball(4, 3).unwrap().interior(), g.ball(4, 2).unwrap().interior());
        assert!(g.open_ball(4, 0).is_err());
    }

    #[test]
    fn weight_lookup_is_symmetric() {
        let g = WeightedGraph::from_edges([Edge::new(3, 10, 0.5), Edge::new(10, 4, 2.0)]).unwrap();
        assert_eq!(g.weight(3, 10), Some(0.5));
        assert_eq!(g.weight(10, 3), Some(0.5));
        assert_eq!(g.weight(3, 4), None);
        assert_eq!(g.edges().count(), 2);
    }
}
