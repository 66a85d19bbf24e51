//! Dirichlet problems for `-Δ + Q` on a region, and the exhaustion
//! constructions built from them.
//!
//! On interior `x`, `(-Δu + Qu)(x) = f(x)` with `u = bc` on `δS` reads
//!
//! ```text
//! (A u_S)_x = d_x f(x) + Σ_{y ∈ δS, y ~ x} μ_xy bc(y)
//! ```
//!
//! with `A` the assembled Dirichlet form.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exhaustion::{check_radii, ExhaustionSeries};
use crate::function::{GraphFunction, Potential};
use crate::generators::BallGenerator;
use crate::graph::{Region, VertexId};
use crate::linalg::{max_abs, SpdSolver};
use crate::spectral::{lambda1, DirichletForm};

/// A factored Dirichlet problem; reusable across right-hand sides.
pub struct DirichletSolver<'g> {
    form: DirichletForm<'g>,
    solver: SpdSolver,
}

impl<'g> DirichletSolver<'g> {
    /// Fails with `Singular` when the form is not positive definite (`λ₁ ≤ 0`).
    pub fn new(region: &Region<'g>, q: &Potential, cfg: &Config) -> Result<Self> {
        let form = DirichletForm::assemble(region, q)?;
        let solver = SpdSolver::new(form.matrix(), cfg)?;
        Ok(Self { form, solver })
    }

    pub fn form(&self) -> &DirichletForm<'g> {
        &self.form
    }

    /// Whether the factorisation certified positive definiteness.
    pub fn is_direct(&self) -> bool {
        self.solver.is_direct()
    }

    /// Solves `A x = rhs` in interior order.
    pub fn solve_raw(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solver.solve(rhs)
    }

    /// Solves `(-Δ + Q)u = f` on `S`, `u = bc` on `δS`, returning `u` on `S̄`.
    pub fn solve(&self, f: &GraphFunction, bc: &GraphFunction, cfg: &Config) -> Result<GraphFunction> {
        let region = self.form.region();
        let g = region.graph();
        let interior = region.interior();
        let mut rhs = Vec::with_capacity(interior.len());
        let mut boundary_part = Vec::with_capacity(interior.len());
        for (p, &i) in region.interior_indices().iter().enumerate() {
            let mut b = 0.0;
            for &(j, w) in g.adj(i) {
                if region.slot_of(j).is_none() {
                    b += w * bc.get(g.id(j))?;
                }
            }
            boundary_part.push(b);
            rhs.push(self.form.mass()[p] * f.get(interior[p])? + b);
        }
        let u = self.solver.solve(&rhs)?;
        let au = self.form.apply(&u);
        let residual =
            au.iter().zip(&rhs).zip(self.form.mass()).map(|((a, r), d)| ((a - r) / d).abs()).fold(0.0, f64::max);
        let f_norm = interior.iter().map(|&x| f.get(x).map(f64::abs)).try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))?;
        let bc_norm = region
            .boundary()
            .iter()
            .map(|&y| bc.get(y).map(f64::abs))
            .try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))?;
        let bound = cfg.solve_residual * (f_norm + bc_norm + 1.0);
        if !(residual < bound) {
            return Err(Error::Residual { residual, bound });
        }
        let mut out: GraphFunction = interior.into_iter().zip(u).collect();
        for y in region.boundary() {
            out.set(y, bc.get(y)?);
        }
        Ok(out)
    }
}

/// `u` on `S̄` with `(-Δ + Q)u = f` on `S` and `u = bc` on `δS`.
pub fn dirichlet_solve(
    region: &Region<'_>,
    q: &Potential,
    f: &GraphFunction,
    bc: &GraphFunction,
    cfg: &Config,
) -> Result<GraphFunction> {
    DirichletSolver::new(region, q, cfg)?.solve(f, bc, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceStep {
    pub radius: usize,
    pub interior_size: usize,
    pub min_u: f64,
    pub u_at_origin: f64,
    /// `sup |û_R - û_{R'}|` on the smallest interior against the previous radius.
    pub cauchy_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceExhaustion {
    pub origin: VertexId,
    pub steps: Vec<ExistenceStep>,
    /// Cauchy gaps as a series over the radii after the first.
    pub gaps: ExhaustionSeries,
    /// `û` on the smallest interior at the largest radius.
    pub normalized: GraphFunction,
}

/// Positive solutions of `(-Δ + Q)u = 0` on growing balls.
///
/// On each open ball `B(x0, R)`: solve `(-Δ + Q)v = -Q` with `v = 0` on the
/// boundary, set `u = v + 1` (so `u = 1` on the boundary), require `u > 0`
/// on the interior and normalise `û = u / u(x0)`.
pub fn existence_exhaustion(
    generator: &dyn BallGenerator,
    x0: VertexId,
    radii: &[usize],
    q: &Potential,
    cfg: &Config,
) -> Result<ExistenceExhaustion> {
    check_radii(radii)?;
    let mut steps = Vec::with_capacity(radii.len());
    let mut gaps = ExhaustionSeries::new(format!("existence cauchy gap {}", generator.name()));
    let mut core: Vec<VertexId> = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for &r in radii {
        let host = generator.host(x0, r)?;
        let region = host.open_ball(x0, r)?;
        let solver = DirichletSolver::new(&region, q, cfg)?;
        let interior = region.interior();
        let f: GraphFunction = interior.iter().map(|&x| Ok((x, -q.at(x)?))).collect::<Result<_>>()?;
        let bc = GraphFunction::constant(region.boundary(), 0.0);
        let v = solver.solve(&f, &bc, cfg)?;
        let u = v.map(|a| a + 1.0);
        let mut min_u = f64::INFINITY;
        for &x in &interior {
            let ux = u.get(x)?;
            if !(ux > 0.0) {
                return Err(Error::PositivityFailure { vertex: x, value: ux });
            }
            min_u = min_u.min(ux);
        }
        let u0 = u.get(x0)?;
        if core.is_empty() {
            core = interior.clone();
        }
        let normalized: Vec<f64> = core.iter().map(|&x| u.get(x).map(|v| v / u0)).collect::<Result<_>>()?;
        let cauchy_gap = previous.as_ref().map(|p| {
            let diff: Vec<f64> = p.iter().zip(&normalized).map(|(a, b)| a - b).collect();
            max_abs(&diff)
        });
        if let Some(gap) = cauchy_gap {
            gaps.push(r, gap);
        }
        steps.push(ExistenceStep { radius: r, interior_size: interior.len(), min_u, u_at_origin: u0, cauchy_gap });
        previous = Some(normalized);
    }
    let normalized = core.iter().copied().zip(previous.unwrap_or_default()).collect();
    Ok(ExistenceExhaustion { origin: x0, steps, gaps, normalized })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonReport {
    pub u: GraphFunction,
    pub lambda1: f64,
    /// `∫_S u²`
    pub lhs: f64,
    /// `λ₁⁻² ∫_S f²`
    pub rhs: f64,
    pub slack: f64,
    pub positive: bool,
    pub pass: bool,
}

/// `u` solving `(-Δ + Q)u = f ≥ 0` with zero boundary values, with the
/// `L²` bound `∫u² ≤ λ₁⁻² ∫f²` and interior positivity checked.
pub fn poisson_solve(region: &Region<'_>, q: &Potential, f: &GraphFunction, cfg: &Config) -> Result<PoissonReport> {
    let interior = region.interior();
    let mut nontrivial = false;
    for &x in &interior {
        let v = f.get(x)?;
        if v < 0.0 {
            return Err(Error::Precondition(format!("f({x}) = {v} is negative")));
        }
        nontrivial |= v > 0.0;
    }
    if !nontrivial {
        return Err(Error::Precondition("f vanishes on the interior".into()));
    }
    let solver = DirichletSolver::new(region, q, cfg)?;
    let lambda = lambda1(solver.form(), cfg)?.lambda;
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("λ₁ = {lambda} is not positive")));
    }
    let bc = GraphFunction::constant(region.boundary(), 0.0);
    let u = solver.solve(f, &bc, cfg)?;
    let mass = region.mass();
    let mut lhs = 0.0;
    let mut f_sq = 0.0;
    let mut positive = true;
    for (p, &x) in interior.iter().enumerate() {
        let ux = u.get(x)?;
        positive &= ux > 0.0;
        lhs += ux * ux * mass[p];
        f_sq += f.get(x)?.powi(2) * mass[p];
    }
    let rhs = f_sq / (lambda * lambda);
    let slack = rhs * (1.0 + cfg.poisson_bound) - lhs;
    Ok(PoissonReport { u, lambda1: lambda, lhs, rhs, slack, positive, pass: positive && slack >= 0.0 })
}
