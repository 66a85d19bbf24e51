//! Deterministic graph families with closed-form ground truth, and the
//! seeded samplers used by the property suites.
//!
//! Lattice and tree balls number their vertices shell by shell from the
//! origin (id 0), lexicographically by coordinates within a lattice shell and
//! in breadth-first order in a tree. A vertex keeps its id in every larger
//! ball, so values at a fixed id can be compared across radii.

use std::collections::HashMap;

use crate::config::{max_vertices, Config};
use crate::error::{Error, Result};
use crate::estimates::SolutionPair;
use crate::function::GraphFunction;
use crate::graph::{Edge, VertexId, WeightedGraph};
use crate::operators::laplacian;
use crate::rng::SeedStream;

pub fn path(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("path needs at least 2 vertices, got {n}")));
    }
    WeightedGraph::from_edges((0..n as u64 - 1).map(|i| Edge::new(i, i + 1, 1.0)))
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a simple cycle needs at least 3 vertices, got {n}")));
    }
    let n = n as u64;
    WeightedGraph::from_edges((0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0)))
}

pub fn star(k: usize) -> Result<WeightedGraph> {
    if k < 1 {
        return Err(Error::InvalidArgument("star needs at least one leaf".into()));
    }
    WeightedGraph::from_edges((1..=k as u64).map(|i| Edge::new(0, i, 1.0)))
}

fn check_cap(requested: u128) -> Result<()> {
    let cap = max_vertices();
    if requested > cap as u128 {
        return Err(Error::ResourceCap { requested, cap });
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `|{x ∈ ℤ^dim : ‖x‖₁ ≤ radius}|`.
pub fn lattice_ball_size(dim: usize, radius: usize) -> u128 {
    (0..=dim as u128).map(|k| (1u128 << k) * binomial(dim as u128, k) * binomial(radius as u128, k)).sum()
}

/// Points with `‖x‖₁ = r`, lexicographically ascending.
fn shell(dim: usize, r: i64) -> Vec<Vec<i64>> {
    if dim == 1 {
        return if r == 0 { vec![vec![0]] } else { vec![vec![-r], vec![r]] };
    }
    let mut out = Vec::new();
    for a in -r..=r {
        for mut rest in shell(dim - 1, r - a.abs()) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// `ℤ^dim` restricted to `‖x‖₁ ≤ radius + 1`, unit weights.
///
/// Vertices in the outer shell are marked truncated, so the ball of radius
/// `radius` about the origin has complete neighbourhoods.
pub fn lattice_ball(dim: usize, radius: usize) -> Result<WeightedGraph> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("lattice dimension must be 1, 2 or 3, got {dim}")));
    }
    if radius < 1 {
        return Err(Error::InvalidArgument("lattice ball radius must be at least 1".into()));
    }
    let outer = radius + 1;
    check_cap(lattice_ball_size(dim, outer))?;
    let mut points = Vec::new();
    let mut outer_shell = Vec::new();
    for r in 0..=outer as i64 {
        for p in shell(dim, r) {
            if r == outer as i64 {
                outer_shell.push(points.len() as VertexId);
            }
            points.push(p);
        }
    }
    let id: HashMap<&[i64], VertexId> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i as VertexId)).collect();
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for axis in 0..dim {
            let mut q = p.clone();
            q[axis] += 1;
            if let Some(&j) = id.get(q.as_slice()) {
                edges.push(Edge::new(i as VertexId, j, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(edges)?.with_truncated(outer_shell)
}

/// Coordinates of lattice vertex `id` under the shell-by-shell numbering.
pub fn lattice_coords(dim: usize, id: VertexId) -> Vec<i64> {
    let mut seen = 0u64;
    let mut r = 0i64;
    loop {
        let s = shell(dim, r);
        if id < seen + s.len() as u64 {
            return s[(id - seen) as usize].clone();
        }
        seen += s.len() as u64;
        r += 1;
    }
}

/// `1 + d((d-1)^radius - 1)/(d-2)`: vertices of the `d`-regular tree within `radius` of the root.
pub fn tree_ball_size(degree: usize, radius: usize) -> u128 {
    let (d, mut layer, mut total) = (degree as u128, 1u128, 1u128);
    for depth in 1..=radius {
        layer *= if depth == 1 { d } else { d - 1 };
        total += layer;
    }
    total
}

/// Ball of radius `radius + 1` in the `degree`-regular tree, root 0, unit weights.
///
/// The deepest layer is marked truncated.
pub fn regular_tree_ball(degree: usize, radius: usize) -> Result<WeightedGraph> {
    if degree < 3 {
        return Err(Error::InvalidArgument(format!("tree degree must be at least 3, got {degree}")));
    }
    if radius < 1 {
        return Err(Error::InvalidArgument("tree ball radius must be at least 1".into()));
    }
    let outer = radius + 1;
    check_cap(tree_ball_size(degree, outer))?;
    let mut edges = Vec::new();
    let mut layer: Vec<VertexId> = vec![0];
    let mut next_id: VertexId = 1;
    for depth in 1..=outer {
        let mut children = Vec::new();
        for &parent in &layer {
            let k = if depth == 1 { degree } else { degree - 1 };
            for _ in 0..k {
                edges.push(Edge::new(parent, next_id, 1.0));
                children.push(next_id);
                next_id += 1;
            }
        }
        layer = children;
    }
    WeightedGraph::from_edges(edges)?.with_truncated(layer)
}

/// Depth of tree vertex `id` under the breadth-first numbering.
pub fn tree_depth(degree: usize, id: VertexId) -> usize {
    let mut depth = 0;
    while tree_ball_size(degree, depth) <= id as u128 {
        depth += 1;
    }
    depth
}

/// A source of host graphs for exhaustion experiments.
pub trait BallGenerator {
    fn name(&self) -> String;

    fn origin(&self) -> VertexId {
        0
    }

    /// A host in which every vertex within `radius` of `center` has its full
    /// neighbourhood. Vertex ids do not depend on `radius`.
    fn host(&self, center: VertexId, radius: usize) -> Result<WeightedGraph>;
}

#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub dim: usize,
}

impl BallGenerator for Lattice {
    fn name(&self) -> String {
        format!("lattice{}", self.dim)
    }

    fn host(&self, center: VertexId, radius: usize) -> Result<WeightedGraph> {
        let offset: i64 = lattice_coords(self.dim, center).iter().map(|c| c.abs()).sum();
        lattice_ball(self.dim, (radius + offset as usize).max(1))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegularTree {
    pub degree: usize,
}

impl BallGenerator for RegularTree {
    fn name(&self) -> String {
        format!("tree{}", self.degree)
    }

    fn host(&self, center: VertexId, radius: usize) -> Result<WeightedGraph> {
        regular_tree_ball(self.degree, (radius + tree_depth(self.degree, center)).max(1))
    }
}

/// A finite graph used as its own host.
#[derive(Debug, Clone)]
pub struct FixedGraph {
    pub name: String,
    pub graph: WeightedGraph,
}

impl BallGenerator for FixedGraph {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn origin(&self) -> VertexId {
        self.graph.vertices()[0]
    }

    fn host(&self, center: VertexId, _radius: usize) -> Result<WeightedGraph> {
        if !self.graph.contains(center) {
            return Err(Error::UnknownVertex(center));
        }
        Ok(self.graph.clone())
    }
}

/// `u = exp(ξ)`, `ξ_x` uniform in `[-1, 1]` drawn in ascending id order, and
/// `Q = Δu/u` on every vertex with a complete neighbourhood.
pub fn sample_solution_pair<'g>(g: &'g WeightedGraph, seed: u64, cfg: &Config) -> Result<SolutionPair<'g>> {
    let mut rng = SeedStream::new(seed);
    let u: GraphFunction = g.vertices().iter().map(|&x| (x, rng.uniform_in(-1.0, 1.0).exp())).collect();
    let declared: Vec<VertexId> = g.complete_vertices().collect();
    let mut q = GraphFunction::new();
    for &x in &declared {
        q.set(x, laplacian(g, &u, x)? / u.get(x)?);
    }
    let check = Config { pair_residual: 1e-14, ..cfg.clone() };
    SolutionPair::new(g, u, q, declared, &check)
}

/// Same topology with every weight replaced by `exp(ξ)`, `ξ` uniform in `[-1, 1]`.
pub fn perturb_weights(g: &WeightedGraph, rng: &mut SeedStream) -> Result<WeightedGraph> {
    let edges: Vec<Edge> = g.edges().map(|e| Edge::new(e.x, e.y, rng.uniform_in(-1.0, 1.0).exp())).collect();
    let truncated: Vec<VertexId> =
        g.vertices().iter().copied().filter(|&v| g.is_truncated(v).unwrap_or(false)).collect();
    WeightedGraph::with_vertices(g.vertices(), edges)?.with_truncated(truncated)
}

/// Drops truncation marks: the ball becomes a finite graph in its own right.
pub fn as_finite(g: &WeightedGraph) -> Result<WeightedGraph> {
    WeightedGraph::with_vertices(g.vertices(), g.edges())
}

/// A finite fixture of at most `max_vertices` vertices with random positive
/// weights, drawn from paths, cycles, stars, small lattice balls and
/// regular-tree balls.
pub fn random_fixture(rng: &mut SeedStream, max_vertices: usize) -> Result<WeightedGraph> {
    let max_vertices = max_vertices.max(4);
    let topology = loop {
        let g = match rng.below(6) {
            0 => path(rng.range(2, max_vertices))?,
            1 => cycle(rng.range(3, max_vertices))?,
            2 => star(rng.range(1, max_vertices - 1))?,
            3 => as_finite(&lattice_ball(2, rng.range(1, 3))?)?,
            4 => as_finite(&lattice_ball(3, 1)?)?,
            _ => as_finite(&regular_tree_ball(rng.range(3, 4), rng.range(1, 2))?)?,
        };
        if g.vertex_count() <= max_vertices {
            break g;
        }
    };
    perturb_weights(&topology, rng)
}

/// A random connected interior of size `1..=max_size`, never the whole graph.
pub fn random_region(g: &WeightedGraph, rng: &mut SeedStream, max_size: usize) -> Vec<VertexId> {
    let candidates: Vec<VertexId> = g.complete_vertices().collect();
    let limit = max_size.min(g.vertex_count() - 1).max(1);
    let target = rng.range(1, limit);
    let mut interior = vec![candidates[rng.below(candidates.len())]];
    while interior.len() < target {
        let mut frontier: Vec<VertexId> = interior
            .iter()
            .flat_map(|&x| g.neighbors(x).expect("known vertex").map(|(y, _)| y))
            .filter(|y| !interior.contains(y) && !g.is_truncated(*y).unwrap_or(true))
            .collect();
        frontier.sort_unstable();
        frontier.dedup();
        if frontier.is_empty() {
            break;
        }
        interior.push(frontier[rng.below(frontier.len())]);
    }
    interior.sort_unstable();
    interior
}

/// Values uniform in `[-2, 2]`, with roughly one vertex in ten set exactly to 0.
pub fn random_function(g: &WeightedGraph, rng: &mut SeedStream) -> GraphFunction {
    g.vertices()
        .iter()
        .map(|&x| {
            let v = rng.uniform_in(-2.0, 2.0);
            (x, if rng.below(10) == 0 { 0.0 } else { v })
        })
        .collect()
}
