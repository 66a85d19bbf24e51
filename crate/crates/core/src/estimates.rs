//! Gradient bound for positive solutions of `-Δu + Qu = 0` and the Harnack
//! constant obtained by chaining it along minimizing paths.
//!
//! For such a solution, at every vertex
//!
//! ```text
//! |∇u|²(x) ≤ P(x) u(x)²,    P(x) = d̂_x (1 + Q(x))² - 2Q(x) - 1
//! ```
//!
//! and along an edge `x ~ y` of a path, `u(y) ≤ (1 + √(d_x/μ_xy · P(x))) u(x)`.
//! Multiplying those factors along the deterministic minimizing path between
//! every ordered pair of `S` gives a valid `C(S)` with `sup_S u ≤ C inf_S u`.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{VertexId, WeightedGraph};
use crate::operators::{grad_sq, laplacian};

/// A strictly positive `u` with a potential `Q` such that `-Δu + Qu = 0`
/// on every declared vertex.
#[derive(Debug, Clone)]
pub struct SolutionPair<'g> {
    graph: &'g WeightedGraph,
    u: GraphFunction,
    q: GraphFunction,
    declared: Vec<VertexId>,
    residual: f64,
}

impl<'g> SolutionPair<'g> {
    /// Validates positivity of `u` and the equation residual on `declared`.
    pub fn new(
        graph: &'g WeightedGraph,
        u: GraphFunction,
        q: GraphFunction,
        declared: Vec<VertexId>,
        cfg: &Config,
    ) -> Result<Self> {
        for (x, ux) in u.iter() {
            if !(ux > 0.0) {
                return Err(Error::PositivityFailure { vertex: x, value: ux });
            }
        }
        let mut residual: f64 = 0.0;
        for &x in &declared {
            let r = -laplacian(graph, &u, x)? + q.get(x)? * u.get(x)?;
            residual = residual.max(r.abs());
        }
        let bound = cfg.pair_residual * u.sup_norm();
        if residual >= bound {
            return Err(Error::Residual { residual, bound });
        }
        Ok(Self { graph, u, q, declared, residual })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn u(&self) -> &GraphFunction {
        &self.u
    }

    pub fn q(&self) -> &GraphFunction {
        &self.q
    }

    pub fn declared(&self) -> &[VertexId] {
        &self.declared
    }

    /// `‖-Δu + Qu‖∞` on the declared set.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// `P(x) = d̂_x (1 + Q(x))² - 2Q(x) - 1`.
pub fn p_bound(g: &WeightedGraph, q: &GraphFunction, x: VertexId) -> Result<f64> {
    let hat = g.hat_degree(x)?;
    let qx = q.get(x)?;
    Ok(hat * (1.0 + qx).powi(2) - 2.0 * qx - 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub vertices_checked: usize,
    /// max over x of `|∇u|² / (P u²)`; 0 where both vanish
    pub worst_ratio: f64,
    pub worst_vertex: Option<VertexId>,
    /// min over x of `P u² + tol·u² - |∇u|²`
    pub min_slack: f64,
    /// min over x of `P(x) - Q(x)²`
    pub min_p_minus_q_sq: f64,
    pub pass: bool,
}

pub fn gradient_estimate_check(pair: &SolutionPair<'_>, cfg: &Config) -> Result<GradientReport> {
    let g = pair.graph;
    let mut report = GradientReport {
        vertices_checked: 0,
        worst_ratio: 0.0,
        worst_vertex: None,
        min_slack: f64::INFINITY,
        min_p_minus_q_sq: f64::INFINITY,
        pass: true,
    };
    for &x in &pair.declared {
        let ux = pair.u.get(x)?;
        let qx = pair.q.get(x)?;
        let p = p_bound(g, &pair.q, x)?;
        let grad = grad_sq(g, &pair.u, x)?;
        let rhs = p * ux * ux;
        let ratio = if rhs > 0.0 {
            grad / rhs
        } else if grad == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > report.worst_ratio || report.worst_vertex.is_none() {
            report.worst_ratio = report.worst_ratio.max(ratio);
            report.worst_vertex = Some(x);
        }
        report.min_slack = report.min_slack.min(rhs + cfg.gradient * ux * ux - grad);
        // P - Q² = (d̂ - 1)(1 + Q)² ≥ 0 in exact arithmetic
        report.min_p_minus_q_sq = report.min_p_minus_q_sq.min(p - qx * qx);
        report.vertices_checked += 1;
    }
    let scale = 1.0 + pair.q.sup_norm().powi(2);
    report.pass = report.min_slack >= 0.0 && report.min_p_minus_q_sq >= -cfg.identity * scale;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnackMode {
    /// factor `1 + √(d̂_x P(x))`
    Degree,
    /// factor `1 + √((d_x/μ_xy) P(x))` using the actual next edge
    Sharp,
}

fn path_factor(g: &WeightedGraph, q: &GraphFunction, x: VertexId, next: VertexId, mode: HarnackMode) -> Result<f64> {
    if g.is_truncated(x)? {
        return Err(Error::TruncatedNeighborhood(x));
    }
    let p = p_bound(g, q, x)?.max(0.0);
    let ratio = match mode {
        HarnackMode::Degree => g.hat_degree(x)?,
        HarnackMode::Sharp => {
            let w = g.weight(x, next).ok_or(Error::UnknownVertex(next))?;
            g.degree(x)? / w
        }
    };
    Ok(1.0 + (ratio * p).sqrt())
}

/// `C(S)`: the largest product of path factors over ordered pairs of `S`.
pub fn harnack_constant(g: &WeightedGraph, q: &GraphFunction, s: &[VertexId], mode: HarnackMode) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Precondition("Harnack set is empty".into()));
    }
    let mut c: f64 = 1.0;
    for &a in s {
        for &b in s {
            if a == b {
                continue;
            }
            let path = g.minimizing_path(a, b)?;
            let mut prod = 1.0;
            for step in path.windows(2) {
                prod *= path_factor(g, q, step[0], step[1], mode)?;
            }
            c = c.max(prod);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnackReport {
    pub sup: f64,
    pub inf: f64,
    pub ratio: f64,
    pub c_degree: f64,
    pub c_sharp: f64,
    pub pass_degree: bool,
    pub pass_sharp: bool,
    pub sharp_below_degree: bool,
}

impl HarnackReport {
    pub fn pass(&self) -> bool {
        self.pass_degree && self.pass_sharp && self.sharp_below_degree
    }
}

/// Checks `sup_S u ≤ C(S) inf_S u` in both modes.
pub fn harnack_verify(pair: &SolutionPair<'_>, s: &[VertexId], cfg: &Config) -> Result<HarnackReport> {
    let g = pair.graph;
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for &x in s {
        let ux = pair.u.get(x)?;
        sup = sup.max(ux);
        inf = inf.min(ux);
    }
    let c_degree = harnack_constant(g, &pair.q, s, HarnackMode::Degree)?;
    let c_sharp = harnack_constant(g, &pair.q, s, HarnackMode::Sharp)?;
    let slack = 1.0 + cfg.harnack;
    Ok(HarnackReport {
        sup,
        inf,
        ratio: sup / inf,
        c_degree,
        c_sharp,
        pass_degree: sup <= c_degree * inf * slack,
        pass_sharp: sup <= c_sharp * inf * slack,
        sharp_below_degree: c_sharp <= c_degree * slack,
    })
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

    fn fixture(g: &WeightedGraph) -> SolutionPair<'_> {
        SolutionPair::new(g, f(&[1.0, 2.0, 1.0]), f(&[1.0, -0.5, 1.0]), vec![0, 1, 2], &Config::default()).unwrap()
    }

    #[test]
    fn p_bound_examples() {
        let g = p3();
        assert_eq!(p_bound(&g, &f(&[0.0, 0.0, 0.0]), 1).unwrap(), 1.0);
        assert_eq!(p_bound(&g, &f(&[0.0, -0.5, 0.0]), 1).unwrap(), 0.5);
        assert_eq!(p_bound(&g, &f(&[1.0, 0.0, 0.0]), 0).unwrap(), 1.0);
        assert!(matches!(p_bound(&g, &f(&[1.0]), 2), Err(Error::Undefined(2))));
    }

    #[test]
    fn gradient_fixture_passes() {
        let g = p3();
        let pair = fixture(&g);
        assert_eq!(grad_sq(&g, pair.u(), 1).unwrap(), 1.0);
        let r = gradient_estimate_check(&pair, &Config::default()).unwrap();
        assert!(r.pass);
        assert!(r.worst_ratio <= 1.0);
    }

    #[test]
    fn constant_u_has_zero_ratio() {
        let g = p3();
        let pair = SolutionPair::new(&g, f(&[3.0; 3]), f(&[0.0; 3]), vec![0, 1, 2], &Config::default()).unwrap();
        let r = gradient_estimate_check(&pair, &Config::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst_ratio, 0.0);
    }

    #[test]
    fn pair_rejects_bad_inputs() {
        let g = p3();
        let cfg = Config::default();
        assert!(matches!(
            SolutionPair::new(&g, f(&[1.0, 0.0, 1.0]), f(&[0.0; 3]), vec![0], &cfg),
            Err(Error::PositivityFailure { vertex: 1, .. })
        ));
        assert!(matches!(
            SolutionPair::new(&g, f(&[1.0, 2.0, 1.0]), f(&[0.0; 3]), vec![1], &cfg),
            Err(Error::Residual { .. })
        ));
    }

    #[test]
    fn harnack_constant_examples() {
        let g = p3();
        let q = f(&[1.0, -0.5, 1.0]);
        assert_eq!(harnack_constant(&g, &q, &[1], HarnackMode::Degree).unwrap(), 1.0);
        assert_eq!(harnack_constant(&g, &q, &[0, 1], HarnackMode::Degree).unwrap(), 2.0);
        assert_eq!(harnack_constant(&g, &q, &[0, 1], HarnackMode::Sharp).unwrap(), 2.0);
    }

    #[test]
    fn harnack_fixture_is_tight() {
        let g = p3();
        let pair = fixture(&g);
        let r = harnack_verify(&pair, &[0, 1], &Config::default()).unwrap();
        assert_eq!(r.ratio, 2.0);
        assert_eq!(r.c_degree, 2.0);
        assert!(r.pass());
    }

    #[test]
    fn harnack_missing_potential_on_path_is_an_error() {
        let g = WeightedGraph::from_edges((0..4).map(|i| Edge::new(i, i + 1, 1.0))).unwrap();
        let q: GraphFunction = [(0, 0.0), (4, 0.0)].into_iter().collect();
        assert!(matches!(harnack_constant(&g, &q, &[0, 4], HarnackMode::Degree), Err(Error::Undefined(1))));
    }
}
