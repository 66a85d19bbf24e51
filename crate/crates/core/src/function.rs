use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// A real function on a declared finite vertex set.
///
/// Lookups outside the domain are errors, never silent zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GraphFunction {
    values: BTreeMap<VertexId, f64>,
}

impl GraphFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(domain: impl IntoIterator<Item = VertexId>, c: f64) -> Self {
        domain.into_iter().map(|v| (v, c)).collect()
    }

    pub fn from_fn(domain: impl IntoIterator<Item = VertexId>, mut f: impl FnMut(VertexId) -> f64) -> Self {
        domain.into_iter().map(|v| (v, f(v))).collect()
    }

    pub fn get(&self, x: VertexId) -> Result<f64> {
        self.values.get(&x).copied().ok_or(Error::Undefined(x))
    }

    pub fn set(&mut self, x: VertexId, value: f64) {
        self.values.insert(x, value);
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.values.contains_key(&x)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.values.keys().copied()
    }

    /// `(vertex, value)` pairs in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.values.iter().map(|(&v, &x)| (v, x))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        self.iter().map(|(v, x)| (v, f(x))).collect()
    }

    /// `‖u‖∞` over the domain; 0 for the empty function.
    pub fn sup_norm(&self) -> f64 {
        self.values.values().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn restrict(&self, domain: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        domain.into_iter().map(|v| Ok((v, self.get(v)?))).collect()
    }

    /// `a·self + b·other` on the common domain (domains must agree).
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.iter().map(|(v, x)| Ok((v, a * x + b * other.get(v)?))).collect()
    }
}

impl FromIterator<(VertexId, f64)> for GraphFunction {
    fn from_iter<I: IntoIterator<Item = (VertexId, f64)>>(iter: I) -> Self {
        Self { values: iter.into_iter().collect() }
    }
}

/// A potential `Q` for `-Δ + Q` on a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Potential {
    Zero,
    Constant(f64),
    Function(GraphFunction),
}

impl Potential {
    pub fn at(&self, x: VertexId) -> Result<f64> {
        match self {
            Potential::Zero => Ok(0.0),
            Potential::Constant(q) => Ok(*q),
            Potential::Function(f) => f.get(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Constant(q) => *q == 0.0,
            Potential::Function(f) => f.iter().all(|(_, q)| q == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups_outside_the_domain_fail() {
        let u = GraphFunction::constant([0, 1, 2], 1.5);
        assert_eq!(u.get(1).unwrap(), 1.5);
        assert!(matches!(u.get(3), Err(Error::Undefined(3))));
        assert!(matches!(Potential::Function(u).at(7), Err(Error::Undefined(7))));
    }

    #[test]
    fn sup_norm_and_combine() {
        let u: GraphFunction = [(0, -3.0), (1, 2.0)].into_iter().collect();
        let v = GraphFunction::constant([0, 1], 1.0);
        assert_eq!(u.sup_norm(), 3.0);
        let w = u.combine(2.0, &v, -1.0).unwrap();
        assert_eq!(w.get(0).unwrap(), -7.0);
        assert_eq!(w.get(1).unwrap(), 3.0);
    }
}
