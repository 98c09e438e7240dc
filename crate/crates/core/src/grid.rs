//! Evaluation grids and the Hurst parameter newtype.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Hurst exponent constrained to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(HurstParam(h))
        } else {
            Err(Error::InvalidHurst { value: h })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Grid spacing metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Explicit,
}

/// A finite, strictly increasing set of evaluation times.
///
/// Uniform grids remember their step so samplers can exploit increment
/// stationarity; explicit grids are arbitrary strictly increasing point sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    kind: GridKind,
    step: Option<f64>,
}

impl TimeGrid {
    /// Uniform grid of `n` points from `start` to `stop` inclusive.
    pub fn uniform(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 2 points, got {n}"),
            });
        }
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(Error::InvalidGrid {
                reason: format!("invalid uniform range [{start}, {stop}]"),
            });
        }
        let step = (stop - start) / (n - 1) as f64;
        let points = (0..n).map(|k| start + k as f64 * step).collect();
        Self::finish(points, GridKind::Uniform, Some(step))
    }

    /// Uniform grid with points `k * step` for `k` in `k_min..=k_max`.
    ///
    /// When `k_min <= 0 <= k_max` the grid contains an exact 0.0, which
    /// two-sided samplers and the normalization step rely on.
    pub fn uniform_indexed(step: f64, k_min: i64, k_max: i64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid {
                reason: format!("step must be positive, got {step}"),
            });
        }
        if k_max - k_min < 1 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 2 points, got k range [{k_min}, {k_max}]"),
            });
        }
        let points = (k_min..=k_max).map(|k| k as f64 * step).collect();
        Self::finish(points, GridKind::Uniform, Some(step))
    }

    /// Grid from explicit strictly increasing times.
    pub fn explicit(points: Vec<f64>) -> Result<Self> {
        Self::finish(points, GridKind::Explicit, None)
    }

    fn finish(points: Vec<f64>, kind: GridKind, step: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 2 points, got {}", points.len()),
            });
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidGrid {
                    reason: format!(
                        "points must be strictly increasing ({} then {})",
                        w[0], w[1]
                    ),
                });
            }
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: "non-finite grid point".into(),
            });
        }
        Ok(TimeGrid { points, kind, step })
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Step of a uniform grid.
    #[inline]
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    #[inline]
    pub fn first(&self) -> f64 {
        self.points[0]
    }

    #[inline]
    pub fn last(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Index of the exact 0.0 grid point, if present.
    pub fn zero_index(&self) -> Option<usize> {
        self.points.iter().position(|&t| t == 0.0)
    }

    /// Restriction to the points inside `[lo, hi]`, keeping kind and step.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let points: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|&t| t >= lo && t <= hi)
            .collect();
        Self::finish(points, self.kind, self.step)
    }
}
