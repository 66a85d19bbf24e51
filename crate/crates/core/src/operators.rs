//! The random-walk Laplacian, squared gradient, weighted integral, and the
//! pointwise Kato and `Δu² = 2uΔu + |∇u|²` identities as executable checks.
//!
//! ```text
//! Δu(x)     = Σ_{y~x} (μ_xy/d_x) (u(y) - u(x))
//! |∇u|²(x)  = Σ_{y~x} (μ_xy/d_x) (u(y) - u(x))²      (no factor 1/2)
//! ∫ u       = Σ_x u(x) d_x
//! ```
//!
//! Sums run over neighbours in ascending id order.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{VertexId, WeightedGraph};

#[derive(Debug, Clone, Copy)]
pub struct OperatorContext<'a> {
    pub graph: &'a WeightedGraph,
    pub potential: Option<&'a GraphFunction>,
}

impl<'a> OperatorContext<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Self {
        Self { graph, potential: None }
    }

    pub fn with_potential(graph: &'a WeightedGraph, q: &'a GraphFunction) -> Self {
        Self { graph, potential: Some(q) }
    }

    pub fn laplacian(&self, u: &GraphFunction, x: VertexId) -> Result<f64> {
        laplacian(self.graph, u, x)
    }

    pub fn grad_sq(&self, u: &GraphFunction, x: VertexId) -> Result<f64> {
        grad_sq(self.graph, u, x)
    }

    /// `-Δu(x) + Q(x) u(x)`; `Q` defaults to 0.
    pub fn schrodinger(&self, u: &GraphFunction, x: VertexId) -> Result<f64> {
        let q = match self.potential {
            Some(q) => q.get(x)?,
            None => 0.0,
        };
        Ok(-self.laplacian(u, x)? + q * u.get(x)?)
    }
}

fn complete_index(g: &WeightedGraph, x: VertexId) -> Result<usize> {
    let i = g.index_of(x)?;
    if g.truncated_at(i) {
        return Err(Error::TruncatedNeighborhood(x));
    }
    Ok(i)
}

pub fn laplacian(g: &WeightedGraph, u: &GraphFunction, x: VertexId) -> Result<f64> {
    let i = complete_index(g, x)?;
    let ux = u.get(x)?;
    let d = g.degree_at(i);
    let mut acc = 0.0;
    for &(j, w) in g.adj(i) {
        acc += (w / d) * (u.get(g.id(j))? - ux);
    }
    Ok(acc)
}

pub fn grad_sq(g: &WeightedGraph, u: &GraphFunction, x: VertexId) -> Result<f64> {
    let i = complete_index(g, x)?;
    let ux = u.get(x)?;
    let d = g.degree_at(i);
    let mut acc = 0.0;
    for &(j, w) in g.adj(i) {
        let diff = u.get(g.id(j))? - ux;
        acc += (w / d) * diff * diff;
    }
    Ok(acc)
}

/// `∫_over u = Σ_{x ∈ over} u(x) d_x`.
pub fn integral(g: &WeightedGraph, u: &GraphFunction, over: &[VertexId]) -> Result<f64> {
    let mut acc = 0.0;
    for &x in over {
        acc += u.get(x)? * g.degree(x)?;
    }
    Ok(acc)
}

/// `⟨u, v⟩ = Σ_x u(x) v(x) d_x` over the whole vertex set.
pub fn inner(g: &WeightedGraph, u: &GraphFunction, v: &GraphFunction) -> Result<f64> {
    let mut acc = 0.0;
    for &x in g.vertices() {
        acc += u.get(x)? * v.get(x)? * g.degree(x)?;
    }
    Ok(acc)
}

/// Applies `Δ` at every vertex where it is defined for `u`.
pub fn laplacian_function(g: &WeightedGraph, u: &GraphFunction) -> GraphFunction {
    admissible_vertices(g, u).into_iter().map(|x| (x, laplacian(g, u, x).expect("admissible"))).collect()
}

/// Vertices with a complete neighbourhood on which `u` is fully defined.
pub fn admissible_vertices(g: &WeightedGraph, u: &GraphFunction) -> Vec<VertexId> {
    g.vertices()
        .iter()
        .enumerate()
        .filter(|&(i, &x)| !g.truncated_at(i) && u.contains(x) && g.adj(i).iter().all(|&(j, _)| u.contains(g.id(j))))
        .map(|(_, &x)| x)
        .collect()
}

/// `sign(0) = 0`.
fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn sign_plus(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KatoReport {
    pub vertices_checked: usize,
    /// min over x of `|∇u|² - |∇|u||²`
    pub gradient_slack: f64,
    /// min over x of `Δ|u| - sign(u)Δu`
    pub abs_slack: f64,
    /// min over x of `Δu₊ - sign₊(u)Δu`
    pub positive_part_slack: f64,
    /// `tol · (1 + ‖u‖∞²)`
    pub allowance: f64,
    pub pass: bool,
}

impl KatoReport {
    pub fn worst_slack(&self) -> f64 {
        self.gradient_slack.min(self.abs_slack).min(self.positive_part_slack)
    }
}

/// Checks the three Kato inequalities at every admissible vertex.
pub fn kato_check(g: &WeightedGraph, u: &GraphFunction, cfg: &Config) -> Result<KatoReport> {
    let abs_u = u.map(f64::abs);
    let pos_u = u.map(|t| (t.abs() + t) / 2.0);
    let allowance = cfg.identity * (1.0 + u.sup_norm().powi(2));
    let mut report = KatoReport {
        vertices_checked: 0,
        gradient_slack: f64::INFINITY,
        abs_slack: f64::INFINITY,
        positive_part_slack: f64::INFINITY,
        allowance,
        pass: true,
    };
    for x in admissible_vertices(g, u) {
        let ux = u.get(x)?;
        let lap = laplacian(g, u, x)?;
        report.gradient_slack = report.gradient_slack.min(grad_sq(g, u, x)? - grad_sq(g, &abs_u, x)?);
        report.abs_slack = report.abs_slack.min(laplacian(g, &abs_u, x)? - sign(ux) * lap);
        report.positive_part_slack = report.positive_part_slack.min(laplacian(g, &pos_u, x)? - sign_plus(ux) * lap);
        report.vertices_checked += 1;
    }
    report.pass = report.worst_slack() >= -allowance;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareIdentityReport {
    pub vertices_checked: usize,
    /// max over x of `|Δ(u²) - 2uΔu - |∇u|²|`
    pub max_residual: f64,
    /// vertices where `uΔu ≥ 0`
    pub conditional_checked: usize,
    /// min over those of `Δ(u²) - |∇u|²`
    pub conditional_slack: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Checks `Δu² = 2uΔu + |∇u|²` and, where `uΔu ≥ 0`, `|∇u|² ≤ Δu²`.
pub fn square_identity_check(g: &WeightedGraph, u: &GraphFunction, cfg: &Config) -> Result<SquareIdentityReport> {
    let sq = u.map(|t| t * t);
    let allowance = cfg.identity * (1.0 + u.sup_norm().powi(2));
    let mut report = SquareIdentityReport {
        vertices_checked: 0,
        max_residual: 0.0,
        conditional_checked: 0,
        conditional_slack: f64::INFINITY,
        allowance,
        pass: true,
    };
    for x in admissible_vertices(g, u) {
        let ux = u.get(x)?;
        let lap = laplacian(g, u, x)?;
        let lap_sq = laplacian(g, &sq, x)?;
        let grad = grad_sq(g, u, x)?;
        report.max_residual = report.max_residual.max((lap_sq - 2.0 * ux * lap - grad).abs());
        if ux * lap >= 0.0 {
            report.conditional_checked += 1;
            report.conditional_slack = report.conditional_slack.min(lap_sq - grad);
        }
        report.vertices_checked += 1;
    }
    report.pass = report.max_residual < allowance && report.conditional_slack >= -allowance;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn p3() -> WeightedGraph {
        WeightedGraph::from_edges([Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)]).unwrap()
    }

    fn f(vals: &[f64]) -> GraphFunction {
        vals.iter().enumerate().map(|(i, &v)| (i as u64, v)).collect()
    }

    #[test]
    fn laplacian_examples() {
        let g = p3();
        assert_eq!(laplacian(&g, &f(&[0.0, 1.0, 0.0]), 1).unwrap(), -1.0);
        assert_eq!(laplacian(&g, &f(&[1.0, 2.0, 1.0]), 0).unwrap(), 1.0);
        let c = f(&[3.5, 3.5, 3.5]);
        for x in 0..3 {
            assert_eq!(laplacian(&g, &c, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplacian_needs_neighbour_values() {
        let g = p3();
        let u: GraphFunction = [(0, 1.0), (1, 1.0)].into_iter().collect();
        assert!(matches!(laplacian(&g, &u, 1), Err(Error::Undefined(2))));
    }

    #[test]
    fn grad_sq_examples() {
        let g = p3();
        assert_eq!(grad_sq(&g, &f(&[0.0, 1.0, 0.0]), 1).unwrap(), 1.0);
        assert_eq!(grad_sq(&g, &f(&[2.0, 2.0, 2.0]), 1).unwrap(), 0.0);
        assert_eq!(grad_sq(&g, &f(&[1.0, -1.0, 1.0]), 1).unwrap(), 4.0);
    }

    #[test]
    fn integral_and_inner() {
        let g = p3();
        let all = g.vertices().to_vec();
        assert_eq!(integral(&g, &f(&[0.0, 1.0, 0.0]), &all).unwrap(), 2.0);
        let one = f(&[1.0, 1.0, 1.0]);
        assert_eq!(integral(&g, &one, &all).unwrap(), 4.0);
        assert_eq!(inner(&g, &one, &one).unwrap(), 4.0);
    }

    #[test]
    fn schrodinger_examples() {
        let g = p3();
        let u = f(&[1.0, 2.0, 1.0]);
        let q: GraphFunction = [(0, 0.0), (1, 0.5), (2, 0.0)].into_iter().collect();
        assert_eq!(OperatorContext::with_potential(&g, &q).schrodinger(&u, 1).unwrap(), 2.0);
        assert_eq!(OperatorContext::new(&g).schrodinger(&u, 1).unwrap(), -laplacian(&g, &u, 1).unwrap());
        let c = f(&[2.0, 2.0, 2.0]);
        let qc = GraphFunction::constant([0, 1, 2], 0.25);
        assert_eq!(OperatorContext::with_potential(&g, &qc).schrodinger(&c, 2).unwrap(), 0.5);
    }

    #[test]
    fn kato_fixture() {
        let g = p3();
        let u = f(&[1.0, -1.0, 1.0]);
        let abs_u = u.map(f64::abs);
        assert_eq!(grad_sq(&g, &abs_u, 1).unwrap(), 0.0);
        assert_eq!(laplacian(&g, &abs_u, 1).unwrap(), 0.0);
        assert_eq!(-laplacian(&g, &u, 1).unwrap(), -2.0);
        let r = kato_check(&g, &u, &Config::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.vertices_checked, 3);
    }

    #[test]
    fn kato_equality_for_nonnegative_u() {
        let g = p3();
        let r = kato_check(&g, &f(&[0.5, 0.0, 3.0]), &Config::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.abs_slack, 0.0);
        assert_eq!(r.positive_part_slack, 0.0);
    }

    #[test]
    fn square_identity_fixture() {
        let g = p3();
        let u = f(&[0.0, 1.0, 0.0]);
        let sq = u.map(|t| t * t);
        assert_eq!(laplacian(&g, &sq, 1).unwrap(), -1.0);
        let r = square_identity_check(&g, &u, &Config::default()).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.pass);
        let c = square_identity_check(&g, &f(&[4.0, 4.0, 4.0]), &Config::default()).unwrap();
        assert_eq!(c.max_residual, 0.0);
    }
}
