//! Transition matrices, Green functions of regions and their exhaustions.
//!
//! For a region `S`, `P_S` is the interior block of `p(x, y) = μ_xy / d_x`;
//! the boundary is absorbing. The matrix Green function is
//! `g = (I - P_S)⁻¹ = Σₙ P_Sⁿ` (expected visits of the absorbed walk) and the
//! kernel `g(x, y) / d_y` is symmetric. Both normalisations are carried:
//! `Σ_y g(x, y) f(y)` solves `-Δu = f`, and `Σ_y kernel(x, y) f(y) d_y` is the
//! same sum written as an integral.

use nalgebra::DMatrix;
use serde::Serialize;
use sprs::CsMat;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exhaustion::{check_radii, classify, Direction, ExhaustionSeries, Transience};
use crate::function::{GraphFunction, Potential};
use crate::generators::BallGenerator;
use crate::graph::{Region, VertexId};
use crate::linalg::{csr_from_triplets, matvec, max_abs, SpdSolver};
use crate::operators::laplacian;
use crate::spectral::{lambda1, DirichletForm};

#[derive(Debug, Clone)]
pub struct TransitionMatrix<'g> {
    region: Region<'g>,
    restricted: CsMat<f64>,
    /// per interior row, total probability of stepping onto `δS`
    exit: Vec<f64>,
}

impl<'g> TransitionMatrix<'g> {
    pub fn region(&self) -> &Region<'g> {
        &self.region
    }

    /// `P_S`, interior × interior.
    pub fn restricted(&self) -> &CsMat<f64> {
        &self.restricted
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.region.len();
        let mut m = DMatrix::zeros(n, n);
        for (v, (i, j)) in self.restricted.iter() {
            m[(i, j)] += *v;
        }
        m
    }

    /// `p(x, y)` for interior `x` and any `y`.
    pub fn entry(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let g = self.region.graph();
        if !self.region.contains(x) {
            return Err(Error::InvalidArgument(format!("vertex {x} is not interior")));
        }
        Ok(g.weight(x, y).unwrap_or(0.0) / g.degree(x)?)
    }

    /// Row sums over `S̄`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.restricted
            .outer_iterator()
            .zip(&self.exit)
            .map(|(row, e)| row.iter().map(|(_, v)| v).sum::<f64>() + e)
            .collect()
    }
}

pub fn transition<'g>(region: &Region<'g>) -> Result<TransitionMatrix<'g>> {
    let g = region.graph();
    let mut triplets = Vec::new();
    let mut exit = Vec::with_capacity(region.len());
    for (p, &i) in region.interior_indices().iter().enumerate() {
        if g.truncated_at(i) {
            return Err(Error::TruncatedNeighborhood(g.id(i)));
        }
        let d = g.degree_at(i);
        let mut e = 0.0;
        for &(j, w) in g.adj(i) {
            match region.slot_of(j) {
                Some(s) => triplets.push((p, s, w / d)),
                None => e += w / d,
            }
        }
        exit.push(e);
    }
    Ok(TransitionMatrix { restricted: csr_from_triplets(region.len(), &triplets), region: region.clone(), exit })
}

#[derive(Debug, Clone)]
pub struct GreenMatrix<'g> {
    region: Region<'g>,
    /// `g(x, y)` in interior order (rows x, columns y)
    g: DMatrix<f64>,
    mass: Vec<f64>,
}

impl<'g> GreenMatrix<'g> {
    pub fn region(&self) -> &Region<'g> {
        &self.region
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    fn positions(&self, x: VertexId, y: VertexId) -> Result<(usize, usize)> {
        let px =
            self.region.position(x).ok_or_else(|| Error::InvalidArgument(format!("vertex {x} is not interior")))?;
        let py =
            self.region.position(y).ok_or_else(|| Error::InvalidArgument(format!("vertex {y} is not interior")))?;
        Ok((px, py))
    }

    /// Kronecker-normalised `g(x, y)`.
    pub fn get(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let (px, py) = self.positions(x, y)?;
        Ok(self.g[(px, py)])
    }

    /// Measure-normalised `g(x, y) / d_y`.
    pub fn kernel(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let (px, py) = self.positions(x, y)?;
        Ok(self.g[(px, py)] / self.mass[py])
    }

    /// `max |(I - P_S) g - I|`.
    pub fn identity_residual(&self, p: &TransitionMatrix<'_>) -> f64 {
        let n = self.mass.len();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            let col = self.g.column(c);
            let pc = matvec(p.restricted(), col.as_slice());
            for r in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((col[r] - pc[r] - target).abs());
            }
        }
        worst
    }

    /// `max |k(x,y) - k(y,x)| / max(|k(x,y)|, |k(y,x)|)` for the kernel `k`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.mass.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let a = self.g[(i, j)] / self.mass[j];
                let b = self.g[(j, i)] / self.mass[i];
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }

    /// `(Σ_y g(x, y) f(y))_x` in interior order.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v = &self.g * nalgebra::DVector::from_column_slice(f);
        v.iter().copied().collect()
    }

    /// `Σ_y g(x, y)`, which equals `∫ kernel(x, y) dy`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.g.row_iter().map(|r| r.sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.g.min()
    }

    pub fn min_diagonal(&self) -> f64 {
        self.g.diagonal().min()
    }
}

#[derive(Debug, Clone)]
pub enum SeriesOutcome<'g> {
    Converged {
        green: GreenMatrix<'g>,
        terms: usize,
    },
    /// Stopped at the term cap; `growth` is the largest partial-sum entry at
    /// terms 2, 4, 8, ….
    Truncated {
        partial: GreenMatrix<'g>,
        terms: usize,
        growth: Vec<(usize, f64)>,
    },
}

impl<'g> SeriesOutcome<'g> {
    pub fn green(&self) -> &GreenMatrix<'g> {
        match self {
            SeriesOutcome::Converged { green, .. } => green,
            SeriesOutcome::Truncated { partial, .. } => partial,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, SeriesOutcome::Converged { .. })
    }
}

/// Partial sums `Σ_{n ≤ N} P_Sⁿ e_y` for each requested column; stops when
/// the largest increment entry drops below `tol` or at `n_max` terms.
struct Block {
    sums: Vec<Vec<f64>>,
    terms: usize,
    converged: bool,
    /// `(terms, max partial-sum entry)` at each power of two
    growth: Vec<(usize, f64)>,
}

fn series_block(p: &CsMat<f64>, columns: &[usize], n: usize, n_max: usize, tol: f64) -> Block {
    let mut sums: Vec<Vec<f64>> =
        columns.iter().map(|&c| (0..n).map(|r| if r == c { 1.0 } else { 0.0 }).collect()).collect();
    let mut inc = sums.clone();
    let mut growth = Vec::new();
    let mut terms = 1;
    let mut next_checkpoint = 1;
    while terms < n_max {
        let mut largest: f64 = 0.0;
        for (sum, v) in sums.iter_mut().zip(inc.iter_mut()) {
            *v = matvec(p, v);
            for (s, a) in sum.iter_mut().zip(v.iter()) {
                *s += a;
            }
            largest = largest.max(max_abs(v));
        }
        terms += 1;
        if terms == next_checkpoint * 2 {
            next_checkpoint *= 2;
            growth.push((terms, sums.iter().map(|s| max_abs(s)).fold(0.0, f64::max)));
        }
        if largest < tol {
            return Block { sums, terms, converged: true, growth };
        }
    }
    Block { sums, terms, converged: false, growth }
}

fn assemble_columns<'g>(region: &Region<'g>, columns: Vec<Vec<f64>>) -> GreenMatrix<'g> {
    let n = region.len();
    let mut g = DMatrix::zeros(n, n);
    for (c, col) in columns.into_iter().enumerate() {
        g.set_column(c, &nalgebra::DVector::from_vec(col));
    }
    GreenMatrix { region: region.clone(), g, mass: region.mass() }
}

/// Neumann series `Σₙ P_Sⁿ`.
///
/// Interiors up to `cfg.series_matrix_max` vertices propagate all columns
/// together; larger ones run one column at a time.
pub fn green_series<'g>(region: &Region<'g>, n_max: usize, tol: f64, cfg: &Config) -> Result<SeriesOutcome<'g>> {
    if n_max < 1 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("series needs n_max ≥ 1 and tol > 0".into()));
    }
    let p = transition(region)?;
    let n = region.len();
    let all: Vec<usize> = (0..n).collect();
    let Block { sums, terms, converged, growth } = if n <= cfg.series_matrix_max {
        series_block(p.restricted(), &all, n, n_max, tol)
    } else {
        let mut out = Block { sums: Vec::with_capacity(n), terms: 0, converged: true, growth: Vec::new() };
        for c in all {
            let mut b = series_block(p.restricted(), &[c], n, n_max, tol);
            out.sums.push(b.sums.pop().expect("one column"));
            out.terms = out.terms.max(b.terms);
            out.converged &= b.converged;
            if b.growth.len() > out.growth.len() {
                out.growth = b.growth;
            }
        }
        out
    };
    let green = assemble_columns(region, sums);
    Ok(if converged {
        SeriesOutcome::Converged { green, terms }
    } else {
        SeriesOutcome::Truncated { partial: green, terms, growth }
    })
}

/// Solves `(I - P_S) c = e_y`, i.e. `A c = d_y e_y` with the `Q = 0` form.
pub(crate) fn green_columns(solver: &SpdSolver, mass: &[f64], columns: &[usize]) -> Result<Vec<Vec<f64>>> {
    columns
        .iter()
        .map(|&c| {
            let mut rhs = vec![0.0; mass.len()];
            rhs[c] = mass[c];
            solver.solve(&rhs)
        })
        .collect()
}

/// `g` by one sparse factorisation and a solve per column.
pub fn green_direct<'g>(region: &Region<'g>, cfg: &Config) -> Result<GreenMatrix<'g>> {
    let form = DirichletForm::assemble(region, &Potential::Zero)?;
    let solver = SpdSolver::new(form.matrix(), cfg)?;
    let all: Vec<usize> = (0..region.len()).collect();
    let columns = green_columns(&solver, form.mass(), &all)?;
    Ok(assemble_columns(region, columns))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSeries {
    pub x: VertexId,
    pub y: VertexId,
    pub series: ExhaustionSeries,
    pub monotonicity_defect: f64,
    pub monotone: bool,
    pub nonnegative: bool,
    pub classification: Transience,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenExhaustion {
    pub generator: String,
    pub origin: VertexId,
    pub interior_sizes: Vec<usize>,
    pub probes: Vec<ProbeSeries>,
}

impl GreenExhaustion {
    pub fn all_monotone(&self) -> bool {
        self.probes.iter().all(|p| p.monotone && p.nonnegative)
    }
}

/// `g_R(x, y)` at each probe pair on the open balls `B(x0, R)`.
pub fn green_exhaustion(
    generator: &dyn BallGenerator,
    x0: VertexId,
    radii: &[usize],
    probes: &[(VertexId, VertexId)],
    cfg: &Config,
) -> Result<GreenExhaustion> {
    check_radii(radii)?;
    if probes.is_empty() {
        return Err(Error::InvalidArgument("no probe pairs given".into()));
    }
    let mut series: Vec<ExhaustionSeries> =
        probes.iter().map(|(x, y)| ExhaustionSeries::new(format!("g({x},{y}) {}", generator.name()))).collect();
    let mut columns: Vec<VertexId> = probes.iter().map(|&(_, y)| y).collect();
    columns.sort_unstable();
    columns.dedup();
    let mut interior_sizes = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let host = generator.host(x0, r)?;
        let region = host.open_ball(x0, r)?;
        if k == 0 {
            for &(x, y) in probes {
                for v in [x, y] {
                    if !region.contains(v) {
                        return Err(Error::InvalidArgument(format!("probe vertex {v} is outside the smallest ball")));
                    }
                }
            }
        }
        let form = DirichletForm::assemble(&region, &Potential::Zero)?;
        let solver = SpdSolver::new(form.matrix(), cfg)?;
        let slots: Vec<usize> = columns.iter().map(|&y| region.position(y).expect("probe inside")).collect();
        let solved = green_columns(&solver, form.mass(), &slots)?;
        for (s, &(x, y)) in series.iter_mut().zip(probes) {
            let c = columns.binary_search(&y).expect("column present");
            s.push(r, solved[c][region.position(x).expect("probe inside")]);
        }
        interior_sizes.push(region.len());
    }
    let probes = series
        .into_iter()
        .zip(probes)
        .map(|(s, &(x, y))| {
            let defect = s.monotonicity_defect(Direction::Nondecreasing);
            ProbeSeries {
                x,
                y,
                monotonicity_defect: defect,
                monotone: defect <= cfg.monotone,
                nonnegative: s.values.iter().all(|&v| v >= 0.0),
                classification: classify(&s, cfg),
                series: s,
            }
        })
        .collect();
    Ok(GreenExhaustion { generator: generator.name(), origin: x0, interior_sizes, probes })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenBoundReport {
    /// `A = max_x Σ_y g(x, y)`
    pub a: f64,
    pub lambda1: f64,
    pub product: f64,
    pub slack: f64,
    /// `‖u - λ₁ Σ_y kernel(·, y) u(y) d_y‖∞ / ‖u‖∞` for the principal eigenfunction
    pub representation_residual: f64,
    pub pass: bool,
}

/// `λ₁(S) · A(S) ≥ 1` and the Green representation of the principal eigenfunction.
pub fn eigen_bound_check(region: &Region<'_>, cfg: &Config) -> Result<EigenBoundReport> {
    let green = green_direct(region, cfg)?;
    let a = green.row_sums().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let form = DirichletForm::assemble(region, &Potential::Zero)?;
    let pair = lambda1(&form, cfg)?;
    let n = region.len();
    let u = &pair.vector;
    let mut worst: f64 = 0.0;
    for x in 0..n {
        let integral: f64 = (0..n).map(|y| green.g[(x, y)] / green.mass[y] * u[y] * green.mass[y]).sum();
        worst = worst.max((u[x] - pair.lambda * integral).abs());
    }
    let representation_residual = worst / max_abs(u);
    let product = pair.lambda * a;
    let slack = product - (1.0 - cfg.eigen_bound);
    Ok(EigenBoundReport {
        a,
        lambda1: pair.lambda,
        product,
        slack,
        representation_residual,
        pass: slack >= 0.0 && representation_residual < cfg.representation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperharmonicReport {
    /// `(x, Δφ(x))` for each interior `x`, ascending id
    pub laplacian: Vec<(VertexId, f64)>,
    pub max_laplacian: f64,
    pub worst_vertex: VertexId,
    pub superharmonic: bool,
    /// `max_{δS} φ`
    pub boundary_max: f64,
    /// `∫_S φᵖ`
    pub power_integral: Option<f64>,
}

/// Checks `Δφ ≤ tol` on the interior and reports decay and integrability proxies.
pub fn superharmonic_certificate(
    region: &Region<'_>,
    phi: &GraphFunction,
    p: Option<f64>,
    cfg: &Config,
) -> Result<SuperharmonicReport> {
    let g = region.graph();
    for x in region.closure() {
        let v = phi.get(x)?;
        if !(v > 0.0) {
            return Err(Error::PositivityFailure { vertex: x, value: v });
        }
    }
    if let Some(p) = p {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must exceed 1")));
        }
    }
    let mut values = Vec::with_capacity(region.len());
    let (mut max_laplacian, mut worst_vertex) = (f64::NEG_INFINITY, region.interior()[0]);
    for x in region.interior() {
        let l = laplacian(g, phi, x)?;
        if l > max_laplacian {
            max_laplacian = l;
            worst_vertex = x;
        }
        values.push((x, l));
    }
    let boundary_max = region.boundary().iter().map(|&y| phi.get(y)).try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))?;
    let power_integral = match p {
        Some(p) => {
            let mut acc = 0.0;
            for x in region.interior() {
                acc += phi.get(x)?.powf(p) * g.degree(x)?;
            }
            Some(acc)
        }
        None => None,
    };
    Ok(SuperharmonicReport {
        laplacian: values,
        max_laplacian,
        worst_vertex,
        superharmonic: max_laplacian <= cfg.superharmonic,
        boundary_max,
        power_integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{lattice_ball, lattice_coords, path, regular_tree_ball, tree_depth, Lattice};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn transition_examples() {
        let p4 = path(4).unwrap();
        let t = transition(&p4.region_from_interior(&[1, 2]).unwrap()).unwrap();
        assert_eq!(t.dense(), DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert_eq!(t.row_sums(), vec![1.0, 1.0]);
        assert_eq!(t.entry(1, 0).unwrap(), 0.5);
        let p3 = path(3).unwrap();
        let t = transition(&p3.region_from_interior(&[1]).unwrap()).unwrap();
        assert_eq!(t.dense(), DMatrix::zeros(1, 1));
    }

    #[test]
    fn p4_green_by_both_routes() {
        let cfg = Config::default();
        let p4 = path(4).unwrap();
        let r = p4.region_from_interior(&[1, 2]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]);
        let series = green_series(&r, cfg.series_max_terms, cfg.series_tol, &cfg).unwrap();
        assert!(series.is_converged());
        let direct = green_direct(&r, &cfg).unwrap();
        for (a, b) in series.green().matrix().iter().zip(expected.iter()) {
            assert!(close(*a, *b, 1e-12));
        }
        for (a, b) in direct.matrix().iter().zip(expected.iter()) {
            assert!(close(*a, *b, 1e-12));
        }
        let p3 = path(3).unwrap();
        let r3 = p3.region_from_interior(&[1]).unwrap();
        let s = green_series(&r3, 10, 1e-15, &cfg).unwrap();
        assert_eq!(s.green().get(1, 1).unwrap(), 1.0);
    }

    #[test]
    fn segment_green_matches_closed_form() {
        // interior {1..n-1} of a path 0..n: g(x, y) = 2 min(x,y)(n - max(x,y))/n
        let cfg = Config::default();
        let n = 12u64;
        let g = path(n as usize + 1).unwrap();
        let interior: Vec<VertexId> = (1..n).collect();
        let r = g.region_from_interior(&interior).unwrap();
        let direct = green_direct(&r, &cfg).unwrap();
        let columnwise =
            green_series(&r, cfg.series_max_terms, cfg.series_tol, &Config { series_matrix_max: 0, ..cfg.clone() })
                .unwrap();
        for &x in &interior {
            for &y in &interior {
                let exact = 2.0 * x.min(y) as f64 * (n - x.max(y)) as f64 / n as f64;
                assert!(close(direct.get(x, y).unwrap(), exact, 1e-12));
                assert!(close(columnwise.green().get(x, y).unwrap(), exact, 1e-10));
            }
        }
    }

    #[test]
    fn truncated_series_reports_growth() {
        let g = path(30).unwrap();
        let interior: Vec<VertexId> = (1..29).collect();
        let r = g.region_from_interior(&interior).unwrap();
        match green_series(&r, 16, 1e-15, &Config::default()).unwrap() {
            SeriesOutcome::Truncated { terms, growth, .. } => {
                assert_eq!(terms, 16);
                assert!(growth.windows(2).all(|w| w[1].1 >= w[0].1));
            }
            SeriesOutcome::Converged { .. } => panic!("should not converge in 16 terms"),
        }
    }

    #[test]
    fn eigen_bound_examples() {
        let cfg = Config::default();
        let p4 = path(4).unwrap();
        let rep = eigen_bound_check(&p4.region_from_interior(&[1, 2]).unwrap(), &cfg).unwrap();
        assert!(close(rep.a, 2.0, 1e-14) && close(rep.lambda1, 0.5, 1e-14) && close(rep.product, 1.0, 1e-12));
        assert!(rep.pass);
        let p3 = path(3).unwrap();
        let rep = eigen_bound_check(&p3.region_from_interior(&[1]).unwrap(), &cfg).unwrap();
        assert!(close(rep.product, 1.0, 1e-14));
    }

    #[test]
    fn z1_green_grows_linearly() {
        let cfg = Config::default();
        let radii = [2, 4, 8, 16];
        let rep = green_exhaustion(&Lattice { dim: 1 }, 0, &radii, &[(0, 0)], &cfg).unwrap();
        let probe = &rep.probes[0];
        for (r, v) in probe.series.radii.iter().zip(&probe.series.values) {
            assert!(close(*v, *r as f64, 1e-9));
        }
        assert!(!probe.classification.is_converging());
        assert!(rep.all_monotone());
    }

    #[test]
    fn probes_outside_smallest_ball_are_rejected() {
        let err = green_exhaustion(&Lattice { dim: 1 }, 0, &[2, 4], &[(0, 5)], &Config::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn superharmonic_examples() {
        let cfg = Config::default();
        let t = regular_tree_ball(3, 6).unwrap();
        let r = t.open_ball(0, 6).unwrap();
        let phi: GraphFunction = t.vertices().iter().map(|&v| (v, 0.5f64.powi(tree_depth(3, v) as i32))).collect();
        let rep = superharmonic_certificate(&r, &phi, Some(2.0), &cfg).unwrap();
        assert!(rep.superharmonic);
        assert!(close(rep.laplacian[0].1, -0.5, 1e-15));
        assert!(rep.laplacian[1..].iter().all(|&(_, l)| l.abs() < 1e-15));
        assert!(close(rep.boundary_max, 0.5f64.powi(6), 0.0));

        let z = lattice_ball(1, 8).unwrap();
        let r = z.open_ball(0, 8).unwrap();
        let phi: GraphFunction =
            z.vertices().iter().map(|&v| (v, 1.0 / (1.0 + lattice_coords(1, v)[0].abs() as f64))).collect();
        let rep = superharmonic_certificate(&r, &phi, None, &cfg).unwrap();
        assert!(!rep.superharmonic);

        let one = GraphFunction::constant(z.vertices().iter().copied(), 1.0);
        let rep = superharmonic_certificate(&r, &one, None, &cfg).unwrap();
        assert!(rep.superharmonic && rep.max_laplacian == 0.0 && rep.boundary_max == 1.0);
    }
}
