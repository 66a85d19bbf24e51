//! Per-radius sequences computed along an exhaustion by balls, with
//! monotonicity and convergence diagnostics.
//!
//! None of this claims a limit exists; it reports what the finite sequence
//! does.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustionSeries {
    pub label: String,
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
}

impl ExhaustionSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self { label: label.into(), radii: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, radius: usize, value: f64) {
        self.radii.push(radius);
        self.values.push(value);
    }

    /// `values[k+1] - values[k]`.
    pub fn gaps(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Absolute size of the final step; `None` with fewer than two values.
    pub fn last_gap(&self) -> Option<f64> {
        self.gaps().last().map(|g| g.abs())
    }

    /// Worst violation of the requested monotonicity (≤ 0 means monotone).
    pub fn monotonicity_defect(&self, direction: Direction) -> f64 {
        self.gaps()
            .into_iter()
            .map(|g| match direction {
                Direction::Nonincreasing => g,
                Direction::Nondecreasing => -g,
            })
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    pub fn is_monotone(&self, direction: Direction, tol: f64) -> bool {
        self.monotonicity_defect(direction) <= tol
    }

    /// Whether successive gaps shrink in absolute value.
    pub fn gaps_shrinking(&self) -> bool {
        self.gaps().windows(2).all(|w| w[1].abs() <= w[0].abs())
    }
}

pub(crate) fn check_radii(radii: &[usize]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if radii[0] == 0 {
        return Err(Error::InvalidArgument("exhaustion radii start at 1".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub intercept: f64,
    pub slope: f64,
    pub sse: f64,
}

/// Least-squares line through `(t_k, y_k)`.
pub fn least_squares(t: &[f64], y: &[f64]) -> Fit {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = ym - slope * tm;
    let sse = t.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Fit { intercept, slope, sse }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Transience {
    Converging {
        last_gap: f64,
        /// largest of the last three gap ratios, when available
        gap_ratio: Option<f64>,
        /// geometric-tail extrapolation of the limit
        extrapolated: f64,
    },
    Growing {
        last_gap: f64,
        linear: Fit,
        logarithmic: Fit,
        better: GrowthModel,
    },
}

impl Transience {
    pub fn is_converging(&self) -> bool {
        matches!(self, Transience::Converging { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Transience::Converging { .. } => "CONVERGING",
            Transience::Growing { .. } => "GROWING",
        }
    }
}

/// Classifies an increasing Green sequence.
///
/// CONVERGING when the last gap is below `cfg.converge · (1 + value)`, or
/// when the last three gaps each shrink by at least `cfg.geometric_ratio`
/// (geometric decay). GROWING otherwise, with linear and logarithmic fits
/// in the radius reported as diagnostics.
pub fn classify(series: &ExhaustionSeries, cfg: &Config) -> Transience {
    let value = series.last().unwrap_or(0.0);
    let gaps: Vec<f64> = series.gaps().into_iter().map(f64::abs).collect();
    let last_gap = gaps.last().copied().unwrap_or(f64::INFINITY);
    let ratios: Vec<f64> = gaps
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 {
                w[1] / w[0]
            } else if w[1] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let gap_ratio = (ratios.len() >= 3).then(|| ratios[ratios.len() - 3..].iter().copied().fold(0.0, f64::max));
    let small = last_gap < cfg.converge * (1.0 + value.abs());
    let geometric = gap_ratio.is_some_and(|r| r <= cfg.geometric_ratio);
    if small || geometric {
        let r = gap_ratio.unwrap_or(0.0).min(cfg.geometric_ratio);
        let extrapolated = value + last_gap * r / (1.0 - r);
        return Transience::Converging { last_gap, gap_ratio, extrapolated };
    }
    let t: Vec<f64> = series.radii.iter().map(|&r| r as f64).collect();
    let lt: Vec<f64> = t.iter().map(|r| r.ln()).collect();
    let linear = least_squares(&t, &series.values);
    let logarithmic = least_squares(&lt, &series.values);
    let better = if linear.sse <= logarithmic.sse { GrowthModel::Linear } else { GrowthModel::Logarithmic };
    Transience::Growing { last_gap, linear, logarithmic, better }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: &[(usize, f64)]) -> ExhaustionSeries {
        let mut s = ExhaustionSeries::new("t");
        for &(r, v) in points {
            s.push(r, v);
        }
        s
    }

    #[test]
    fn linear_growth_is_growing_linear() {
        let s = series(&[(2, 2.0), (4, 4.0), (8, 8.0)]);
        match classify(&s, &Config::default()) {
            Transience::Growing { better, linear, .. } => {
                assert_eq!(better, GrowthModel::Linear);
                assert!((linear.slope - 1.0).abs() < 1e-12);
            }
            other => panic!("expected growing, got {other:?}"),
        }
    }

    #[test]
    fn logarithmic_growth_prefers_log_model() {
        let pts: Vec<(usize, f64)> = (2..30).map(|r| (r, (r as f64).ln())).collect();
        match classify(&series(&pts), &Config::default()) {
            Transience::Growing { better, .. } => assert_eq!(better, GrowthModel::Logarithmic),
            other => panic!("expected growing, got {other:?}"),
        }
    }

    #[test]
    fn geometric_approach_converges() {
        let pts: Vec<(usize, f64)> = (4..=12).map(|r| (r, 2.0 - 2f64.powi(-(r as i32)))).collect();
        let c = classify(&series(&pts), &Config::default());
        match c {
            Transience::Converging { extrapolated, .. } => assert!((extrapolated - 2.0).abs() < 1e-12),
            other => panic!("expected converging, got {other:?}"),
        }
    }

    #[test]
    fn monotonicity_and_radii() {
        let s = series(&[(1, 1.0), (2, 0.5), (3, 0.5 + 1e-13)]);
        assert!(s.is_monotone(Direction::Nonincreasing, 1e-12));
        assert!(!s.is_monotone(Direction::Nondecreasing, 1e-12));
        assert!(check_radii(&[1, 2, 2]).is_err());
        assert!(check_radii(&[0, 2]).is_err());
        assert!(check_radii(&[]).is_err());
        assert!(check_radii(&[2, 5]).is_ok());
    }
}
