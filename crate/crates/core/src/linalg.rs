//! Sparse symmetric matrices and the SPD solver used by the Dirichlet,
//! eigenvalue and Green computations.
//!
//! Systems up to `Config::direct_solve_max` unknowns are factored with a
//! sparse LDLᵀ (reverse Cuthill–McKee ordering). Positive definiteness is
//! read off the pivots, so a successful factorisation certifies `λ₁ > 0`.
//! Larger systems use Jacobi-preconditioned conjugate gradients.

use sprs::{CsMat, FillInReduction, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::config::Config;
use crate::error::{Error, Result};

pub(crate) fn csr_from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> CsMat<f64> {
    let mut tri = TriMat::with_capacity((n, n), triplets.len());
    for &(i, j, v) in triplets {
        tri.add_triplet(i, j, v);
    }
    tri.to_csr()
}

pub(crate) fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    a.outer_iterator().map(|row| row.iter().fold(0.0, |acc, (j, &v)| acc + v * x[j])).collect()
}

/// Maximum absolute row sum.
pub(crate) fn inf_norm(a: &CsMat<f64>) -> f64 {
    a.outer_iterator().map(|row| row.iter().map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + a * b)
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) enum SpdSolver {
    /// 1×1 systems, which the sparse factorisation does not accept
    Scalar(f64),
    Direct(Box<LdlNumeric<f64, usize>>),
    Cg {
        matrix: CsMat<f64>,
        diag: Vec<f64>,
        tol: f64,
        max_iter: usize,
    },
}

impl SpdSolver {
    /// Factors `a`, or fails with `Singular` if `a` is not positive definite.
    pub(crate) fn new(a: &CsMat<f64>, cfg: &Config) -> Result<Self> {
        let n = a.rows();
        let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).copied().unwrap_or(0.0)).collect();
        if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Singular(format!("nonpositive diagonal entry at row {i}")));
        }
        if n == 1 {
            return Ok(SpdSolver::Scalar(diag[0]));
        }
        if n > cfg.direct_solve_max {
            return Ok(SpdSolver::Cg { matrix: a.clone(), diag, tol: cfg.cg_tol, max_iter: cfg.cg_max_iter });
        }
        let csc = a.to_csc();
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(csc.view())
            .map_err(|e| Error::Singular(e.to_string()))?;
        let scale = diag.iter().fold(0.0, |m: f64, d| m.max(*d));
        if let Some(k) = ldl.d().iter().position(|&p| !(p > 1e-13 * scale)) {
            return Err(Error::Singular(format!(
                "pivot {k} is {:e}; the form is not positive definite (λ₁ ≤ 0)",
                ldl.d()[k]
            )));
        }
        Ok(SpdSolver::Direct(Box::new(ldl)))
    }

    pub(crate) fn is_direct(&self) -> bool {
        !matches!(self, SpdSolver::Cg { .. })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Scalar(a) => Ok(vec![rhs[0] / a]),
            SpdSolver::Direct(ldl) => Ok(ldl.solve(rhs)),
            SpdSolver::Cg { matrix, diag, tol, max_iter } => conjugate_gradient(matrix, diag, rhs, *tol, *max_iter),
        }
    }
}

/// Jacobi-preconditioned CG; stops when `‖r‖₂ ≤ tol ‖b‖₂`.
pub(crate) fn conjugate_gradient(
    a: &CsMat<f64>,
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = matvec(a, &p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular("conjugate gradient breakdown: pᵀAp ≤ 0".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, diag: f64) -> CsMat<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        csr_from_triplets(n, &t)
    }

    #[test]
    fn direct_and_cg_agree() {
        let a = tridiag(40, 2.0);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let direct = SpdSolver::new(&a, &Config::default()).unwrap();
        assert!(direct.is_direct());
        let cfg = Config { direct_solve_max: 10, ..Config::default() };
        let cg = SpdSolver::new(&a, &cfg).unwrap();
        assert!(!cg.is_direct());
        let x1 = direct.solve(&b).unwrap();
        let x2 = cg.solve(&b).unwrap();
        let r = matvec(&a, &x1);
        for i in 0..40 {
            assert!((r[i] - b[i]).abs() < 1e-12);
            assert!((x1[i] - x2[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_forms_are_rejected() {
        // path Laplacian with free ends: constant null vector
        let mut t = Vec::new();
        for i in 0..5usize {
            let deg = if i == 0 || i == 4 { 1.0 } else { 2.0 };
            t.push((i, i, deg));
            if i + 1 < 5 {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = csr_from_triplets(5, &t);
        assert!(matches!(SpdSolver::new(&a, &Config::default()), Err(Error::Singular(_))));
        let indefinite = tridiag(5, 1.0);
        assert!(matches!(SpdSolver::new(&indefinite, &Config::default()), Err(Error::Singular(_))));
    }
}
