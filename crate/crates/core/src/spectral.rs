//! The Dirichlet form of `-Δ + Q` on a region and its principal eigenpair.
//!
//! With `u` vanishing on `δS`, the quotient `∫(-Δu + Qu)u / ∫u²` equals
//! `uᵀAu / uᵀDu` where, over interior vertices,
//!
//! ```text
//! A_xx = d_x (1 + Q(x)),   A_xy = -μ_xy (x ≠ y),   D = diag(d_x).
//! ```
//!
//! `λ₁` is the smallest generalized eigenvalue of `Au = λDu`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use sprs::CsMat;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exhaustion::{check_radii, Direction, ExhaustionSeries};
use crate::function::{GraphFunction, Potential};
use crate::generators::BallGenerator;
use crate::graph::{Region, VertexId};
use crate::linalg::{csr_from_triplets, dot, inf_norm, matvec, max_abs, SpdSolver};

#[derive(Debug, Clone)]
pub struct DirichletForm<'g> {
    region: Region<'g>,
    potential: Vec<f64>,
    matrix: CsMat<f64>,
    mass: Vec<f64>,
}

impl<'g> DirichletForm<'g> {
    /// Assembles `A` and `D`; `Q` must be defined on every interior vertex.
    pub fn assemble(region: &Region<'g>, q: &Potential) -> Result<Self> {
        let g = region.graph();
        let mut triplets = Vec::new();
        let mut potential = Vec::with_capacity(region.len());
        for (p, &i) in region.interior_indices().iter().enumerate() {
            let x = g.id(i);
            if g.truncated_at(i) {
                return Err(Error::TruncatedNeighborhood(x));
            }
            let qx = q.at(x)?;
            potential.push(qx);
            triplets.push((p, p, g.degree_at(i) * (1.0 + qx)));
            for &(j, w) in g.adj(i) {
                if let Some(s) = region.slot_of(j) {
                    triplets.push((p, s, -w));
                }
            }
        }
        let matrix = csr_from_triplets(region.len(), &triplets);
        Ok(Self { region: region.clone(), potential, matrix, mass: region.mass() })
    }

    pub fn region(&self) -> &Region<'g> {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    /// Interior degrees `d_x`, the diagonal of `D`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `Q` in interior order.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (v, (i, j)) in self.matrix.iter() {
            m[(i, j)] += *v;
        }
        m
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.matrix, u)
    }

    /// Maximum absolute row sum of `A`.
    pub fn norm_inf(&self) -> f64 {
        inf_norm(&self.matrix)
    }

    /// `uᵀAu / uᵀDu` for `u` in interior order.
    pub fn rayleigh(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.len() {
            return Err(Error::InvalidArgument(format!("expected {} interior values, got {}", self.len(), u.len())));
        }
        let den: f64 = u.iter().zip(&self.mass).map(|(a, d)| a * a * d).sum();
        if den == 0.0 {
            return Err(Error::Precondition("Rayleigh quotient of the zero function".into()));
        }
        Ok(dot(u, &self.apply(u)) / den)
    }

    /// Interior values of `u` in interior order; values outside `S` are ignored.
    pub fn interior_values(&self, u: &GraphFunction) -> Result<Vec<f64>> {
        self.region.interior().into_iter().map(|x| u.get(x)).collect()
    }

    /// Extends interior values by zero on `δS`.
    pub fn extend(&self, values: &[f64]) -> GraphFunction {
        let mut f: GraphFunction = self.region.interior().into_iter().zip(values.iter().copied()).collect();
        for y in self.region.boundary() {
            f.set(y, 0.0);
        }
        f
    }
}

/// Quotient of `u` restricted to the interior (treated as zero on `δS`).
pub fn rayleigh(form: &DirichletForm<'_>, u: &GraphFunction) -> Result<f64> {
    form.rayleigh(&form.interior_values(u)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    InverseIteration,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Interior order, `max = 1`, positive at the smallest interior id.
    pub vector: Vec<f64>,
    /// `vector` on `S̄`, zero on `δS`.
    pub eigenfunction: GraphFunction,
    /// `‖Au - λDu‖∞`.
    pub residual: f64,
    pub iterations: usize,
    /// Strictly positive on every interior vertex.
    pub positive: bool,
    pub method: EigenMethod,
}

fn dense_lowest(form: &DirichletForm<'_>) -> (f64, Vec<f64>) {
    let s: Vec<f64> = form.mass.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut b = form.dense();
    let n = form.len();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] *= s[i] * s[j];
        }
    }
    // exact symmetry keeps the eigensolver on its symmetric path
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);
    let k = eig.eigenvalues.imin();
    let w: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    (eig.eigenvalues[k], (0..n).map(|i| w[i] * s[i]).collect())
}

/// Lower bound on the spectrum of `D⁻¹A` from Gershgorin discs.
fn gershgorin_lower(form: &DirichletForm<'_>) -> f64 {
    form.matrix
        .outer_iterator()
        .enumerate()
        .map(|(i, row)| {
            let (mut centre, mut radius) = (0.0, 0.0);
            for (j, v) in row.iter() {
                if i == j {
                    centre += v;
                } else {
                    radius += v.abs();
                }
            }
            (centre - radius) / form.mass[i]
        })
        .fold(f64::INFINITY, f64::min)
}

fn inverse_iteration(form: &DirichletForm<'_>, cfg: &Config) -> Result<(f64, Vec<f64>, usize)> {
    let n = form.len();
    let solver = match SpdSolver::new(&form.matrix, cfg) {
        Ok(s) => s,
        Err(Error::Singular(_)) => {
            // A is not positive definite; shift below the spectrum instead
            let shift = gershgorin_lower(form) - 1.0;
            let mut triplets: Vec<(usize, usize, f64)> = form.matrix.iter().map(|(v, (i, j))| (i, j, *v)).collect();
            triplets.extend(form.mass.iter().enumerate().map(|(i, d)| (i, i, -shift * d)));
            SpdSolver::new(&csr_from_triplets(n, &triplets), cfg)?
        }
        Err(e) => return Err(e),
    };
    let tol = cfg.eigen_residual * form.norm_inf();
    let mut x = vec![1.0; n];
    let mut previous = f64::INFINITY;
    for iteration in 1..=cfg.power_max_iter {
        let rhs: Vec<f64> = x.iter().zip(&form.mass).map(|(a, d)| a * d).collect();
        let mut y = solver.solve(&rhs)?;
        let scale = max_abs(&y);
        y.iter_mut().for_each(|v| *v /= scale);
        x = y;
        let rho = form.rayleigh(&x)?;
        let ax = form.apply(&x);
        let residual = ax.iter().zip(&x).zip(&form.mass).map(|((a, v), d)| (a - rho * d * v).abs()).fold(0.0, f64::max);
        let step = (rho - previous).abs();
        if step < cfg.rayleigh_step * rho.abs().max(1.0) && residual < tol {
            return Ok((rho, x, iteration));
        }
        previous = rho;
    }
    Err(Error::NoConvergence { iterations: cfg.power_max_iter })
}

/// Principal eigenpair of the form.
///
/// Interiors up to `cfg.dense_eigen_max` vertices use a dense symmetric
/// eigensolve of `D^{-1/2} A D^{-1/2}`; larger ones use inverse iteration
/// from the all-ones vector.
pub fn lambda1(form: &DirichletForm<'_>, cfg: &Config) -> Result<Eigenpair> {
    if form.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (lambda, mut v, iterations, method) = if form.len() <= cfg.dense_eigen_max {
        let (l, v) = dense_lowest(form);
        (l, v, 0, EigenMethod::Dense)
    } else {
        let (l, v, it) = inverse_iteration(form, cfg)?;
        (l, v, it, EigenMethod::InverseIteration)
    };
    if v[0] < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.iter_mut().for_each(|a| *a /= top);
    let av = form.apply(&v);
    let residual = av.iter().zip(&v).zip(&form.mass).map(|((a, x), d)| (a - lambda * d * x).abs()).fold(0.0, f64::max);
    let bound = cfg.eigen_residual * form.norm_inf();
    if !(residual < bound) {
        return Err(Error::Residual { residual, bound });
    }
    Ok(Eigenpair {
        lambda,
        positive: v.iter().all(|&a| a > 0.0),
        eigenfunction: form.extend(&v),
        vector: v,
        residual,
        iterations,
        method,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaStep {
    pub radius: usize,
    pub interior_size: usize,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub positive: bool,
    pub method: EigenMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaExhaustion {
    pub series: ExhaustionSeries,
    pub steps: Vec<LambdaStep>,
    /// Largest increase between consecutive radii (0 when nonincreasing).
    pub monotonicity_defect: f64,
    pub monotone: bool,
    /// `λ₁` on the largest ball: an upper estimate of `λ₁(X)`, not a limit.
    pub estimate: f64,
    pub last_gap: Option<f64>,
}

/// `λ₁(B(x0, R))` over the open balls `{d(x0, ·) < R}` for each radius.
pub fn lambda1_exhaustion(
    generator: &dyn BallGenerator,
    x0: VertexId,
    radii: &[usize],
    q: &Potential,
    cfg: &Config,
) -> Result<LambdaExhaustion> {
    check_radii(radii)?;
    let mut series = ExhaustionSeries::new(format!("lambda1 {}", generator.name()));
    let mut steps = Vec::with_capacity(radii.len());
    for &r in radii {
        let host = generator.host(x0, r)?;
        let region = host.open_ball(x0, r)?;
        let form = DirichletForm::assemble(&region, q)?;
        let pair = lambda1(&form, cfg)?;
        series.push(r, pair.lambda);
        steps.push(LambdaStep {
            radius: r,
            interior_size: region.len(),
            lambda: pair.lambda,
            residual: pair.residual,
            iterations: pair.iterations,
            positive: pair.positive,
            method: pair.method,
        });
    }
    let monotonicity_defect = series.monotonicity_defect(Direction::Nonincreasing);
    Ok(LambdaExhaustion {
        monotone: monotonicity_defect <= cfg.monotone,
        monotonicity_defect,
        estimate: series.last().expect("nonempty radii"),
        last_gap: series.last_gap(),
        series,
        steps,
    })
}
