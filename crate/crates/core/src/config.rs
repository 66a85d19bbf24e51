//! Every tolerance and size limit used by the library, in one place.
//!
//! Operations that assert a numerical property or pick an algorithm by
//! problem size take a `&Config`. The command-line front end exposes each
//! field as a `--tol-*` / `--limit-*` override.

use serde::Serialize;

/// Default cap on generated vertex counts; overridden by `GP_MAX_VERTICES`.
pub const DEFAULT_MAX_VERTICES: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    /// Pointwise identities (Kato, square identity, divergence), scaled by `1 + ‖u‖∞²`.
    pub identity: f64,
    /// Slack on `|∇u|² ≤ P u²`, scaled by `u(x)²`.
    pub gradient: f64,
    /// Relative slack on `sup_S u ≤ C inf_S u`.
    pub harnack: f64,
    /// Residual of `-Δu + Qu = 0` accepted for a solution pair, relative to `‖u‖∞`.
    pub pair_residual: f64,
    /// Eigen-residual `‖Au - λDu‖∞`, relative to `‖A‖∞`.
    pub eigen_residual: f64,
    /// Successive Rayleigh values must differ by less than this to stop inverse iteration.
    pub rayleigh_step: f64,
    pub power_max_iter: usize,
    /// Interior sizes up to this use a dense symmetric eigensolve.
    pub dense_eigen_max: usize,
    /// Monotonicity slack along an exhaustion.
    pub monotone: f64,
    /// Dirichlet solve residual, relative to `‖f‖∞ + ‖bc‖∞ + 1`.
    pub solve_residual: f64,
    /// Interior sizes up to this use a sparse LDLᵀ factorisation, above it CG.
    pub direct_solve_max: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Relative slack on the L² bound for Poisson solutions.
    pub poisson_bound: f64,
    /// `(I - P_S) g = I` residual.
    pub green_identity: f64,
    /// Relative kernel symmetry error.
    pub kernel_symmetry: f64,
    /// Stop the Neumann series once the largest increment entry is below this.
    pub series_tol: f64,
    pub series_max_terms: usize,
    /// Whole-matrix series propagation up to this interior size.
    pub series_matrix_max: usize,
    /// Last inter-radius gap below `converge * (1 + value)` classifies CONVERGING.
    pub converge: f64,
    /// Gap ratios at or below this over the last three gaps also classify CONVERGING.
    pub geometric_ratio: f64,
    /// Slack on `λ₁ · A ≥ 1`.
    pub eigen_bound: f64,
    /// Green representation of the principal eigenfunction, relative to `‖u‖∞`.
    pub representation: f64,
    /// `Δφ ≤ tol` for a superharmonic certificate.
    pub superharmonic: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            gradient: 1e-9,
            harnack: 1e-9,
            pair_residual: 1e-10,
            eigen_residual: 1e-10,
            rayleigh_step: 1e-12,
            power_max_iter: 100_000,
            dense_eigen_max: 512,
            monotone: 1e-12,
            solve_residual: 1e-10,
            direct_solve_max: 20_000,
            cg_tol: 1e-12,
            cg_max_iter: 200_000,
            poisson_bound: 1e-9,
            green_identity: 1e-10,
            kernel_symmetry: 1e-12,
            series_tol: 1e-15,
            series_max_terms: 1_000_000,
            series_matrix_max: 2000,
            converge: 1e-6,
            geometric_ratio: 0.75,
            eigen_bound: 1e-9,
            representation: 1e-8,
            superharmonic: 1e-12,
        }
    }
}

/// Vertex cap for generators: `GP_MAX_VERTICES` if set and parseable.
pub fn max_vertices() -> usize {
    std::env::var("GP_MAX_VERTICES").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_VERTICES)
}
