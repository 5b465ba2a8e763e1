//! Monotone piecewise-linear curves through measured anchor points.
//!
//! Used for the offloading-efficiency curve over spectrum share and for the
//! coverage-gain curve over subsidy rate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve needs at least two anchors")]
    TooFewAnchors,
    #[error("anchor x values must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("anchor values must be non-decreasing (at index {0})")]
    NotMonotone(usize),
    #[error("anchor values must be finite")]
    NonFinite,
    #[error("{x} is outside the anchor range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
}

/// Anchors `(x, y)` joined by straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    anchors: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if anchors.len() < 2 {
            return Err(CurveError::TooFewAnchors);
        }
        if anchors.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(CurveError::NonFinite);
        }
        for i in 1..anchors.len() {
            if anchors[i].0 <= anchors[i - 1].0 {
                return Err(CurveError::NotIncreasing(i));
            }
            if anchors[i].1 < anchors[i - 1].1 {
                return Err(CurveError::NotMonotone(i));
            }
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.anchors[0].0, self.anchors[self.anchors.len() - 1].0)
    }

    /// Slopes of consecutive segments, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.anchors
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// True when every segment slope is at most the previous one.
    pub fn is_concave(&self) -> bool {
        const EPS: f64 = 1e-12;
        self.slopes().windows(2).all(|w| w[1] <= w[0] + EPS)
    }

    pub fn eval(&self, x: f64) -> Result<f64, CurveError> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(CurveError::OutOfRange { x, lo, hi });
        }
        // Exact anchor hits return the stored value untouched.
        if let Some(&(_, y)) = self.anchors.iter().find(|(ax, _)| *ax == x) {
            return Ok(y);
        }
        let i = self.anchors.partition_point(|(ax, _)| *ax < x);
        let (x0, y0) = self.anchors[i - 1];
        let (x1, y1) = self.anchors[i];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Slope of the segment that starts at or contains `x` (right-hand
    /// derivative). At the last anchor the final segment's slope is used.
    pub fn right_slope(&self, x: f64) -> Result<f64, CurveError> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(CurveError::OutOfRange { x, lo, hi });
        }
        let slopes = self.slopes();
        let i = self.anchors.partition_point(|(ax, _)| *ax <= x);
        Ok(slopes[(i.max(1) - 1).min(slopes.len() - 1)])
    }
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = CurveError;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(c: PiecewiseLinear) -> Self {
        c.anchors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> PiecewiseLinear {
        PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]).unwrap()
    }

    #[test]
    fn interpolates_and_hits_anchors() {
        let c = tri();
        assert_eq!(c.eval(1.0).unwrap(), 2.0);
        assert!((c.eval(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.eval(2.0).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(tri().eval(3.5), Err(CurveError::OutOfRange { .. })));
        assert!(matches!(tri().eval(-0.1), Err(CurveError::OutOfRange { .. })));
    }

    #[test]
    fn right_slope_picks_segment() {
        let c = tri();
        assert_eq!(c.right_slope(0.0).unwrap(), 2.0);
        assert_eq!(c.right_slope(1.0).unwrap(), 0.5);
        assert_eq!(c.right_slope(3.0).unwrap(), 0.5);
    }

    #[test]
    fn rejects_bad_anchors() {
        assert_eq!(
            PiecewiseLinear::new(vec![(0.0, 0.0)]),
            Err(CurveError::TooFewAnchors)
        );
        assert_eq!(
            PiecewiseLinear::new(vec![(0.0, 0.0), (0.0, 1.0)]),
            Err(CurveError::NotIncreasing(1))
        );
        assert_eq!(
            PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 0.5)]),
            Err(CurveError::NotMonotone(1))
        );
    }

    #[test]
    fn concavity() {
        assert!(tri().is_concave());
        let convex = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert!(!convex.is_concave());
    }
}
