use thiserror::Error;

use crate::graph::{VertexId, Violation};
use crate::io::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("function undefined at vertex {0}")]
    Undefined(VertexId),

    #[error("vertex {0} has a truncated neighbourhood (generator ball too small)")]
    TruncatedNeighborhood(VertexId),

    #[error("invalid graph: {}", format_violations(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("region interior is empty")]
    EmptyRegion,

    #[error("region interior is not connected ({components} components)")]
    DisconnectedRegion { components: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("positivity failure at vertex {vertex}: value {value:e}")]
    PositivityFailure { vertex: VertexId, value: f64 },

    #[error("residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("resource cap exceeded: {requested} vertices requested, cap is {cap}")]
    ResourceCap { requested: u128, cap: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
