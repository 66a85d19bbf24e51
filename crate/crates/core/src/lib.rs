//! Discrete potential theory for Schrödinger operators `-Δ + Q` on weighted
//! graphs.
//!
//! The Laplacian is the random-walk one,
//!
//! ```text
//! Δu(x) = Σ_y (μ_xy / d_x) (u(y) - u(x)),   d_x = Σ_y μ_xy,
//! ```
//!
//! and integrals use the degree measure, `∫u = Σ_x u(x) d_x`.
//!
//! Infinite graphs are approached through exhaustions by balls: generators
//! build each ball one layer wider than requested and mark the outer layer
//! as truncated, so every interior computation sees full neighbourhoods.
//! Quantities defined as limits (`λ₁(X)`, the global Green function) are
//! reported as finite sequences with convergence diagnostics.
//!
//! Module map:
//!
//! - [`graph`], [`function`]: graphs, regions, vertex functions
//! - [`operators`]: `Δ`, `|∇u|²`, integrals, Kato-type inequality checks
//! - [`estimates`]: gradient bound and Harnack constants for positive solutions
//! - [`spectral`]: Dirichlet forms and principal eigenpairs
//! - [`solvers`]: Dirichlet and Poisson problems, existence exhaustions
//! - [`green`]: transition matrices, Green functions, transience diagnostics
//! - [`generators`]: paths, cycles, stars, lattice and tree balls, samplers
//! - [`io`], [`report`]: file formats and structured reports
//! - [`suite`]: the seeded property suite

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimates;
pub mod exhaustion;
pub mod function;
pub mod generators;
pub mod graph;
pub mod green;
pub mod io;
mod linalg;
pub mod operators;
pub mod report;
pub mod rng;
pub mod solvers;
pub mod spectral;
pub mod suite;

pub use config::Config;
pub use error::{Error, Result};
pub use function::{GraphFunction, Potential};
pub use graph::{Edge, Region, VertexId, WeightedGraph};
