//! Adaptive quadrature built on computed Gauss-Legendre rules.
//!
//! Rules are generated at construction by Newton iteration on the Legendre
//! recurrence, so no coefficient tables are embedded. The adaptive driver
//! bisects the worst interval by the two-rule error estimate; integrable
//! endpoint singularities (logs) are handled by passing their locations as
//! split points, after which refinement toward the endpoint converges
//! geometrically.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess, then Newton on P_n
            let mut x = fmath::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_value_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if fmath::abs(dx) < 1e-15 {
                    let (_, d2) = legendre_value_deriv(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // exact center for odd rules
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to f on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Reusable adaptive integrator with a low/high rule pair.
#[derive(Debug, Clone)]
pub struct AdaptiveQuad {
    low: GaussRule,
    high: GaussRule,
}

impl Default for AdaptiveQuad {
    fn default() -> Self {
        AdaptiveQuad {
            low: GaussRule::legendre(7),
            high: GaussRule::legendre(15),
        }
    }
}

impl AdaptiveQuad {
    pub fn new(low_points: usize, high_points: usize) -> Self {
        assert!(low_points < high_points);
        AdaptiveQuad {
            low: GaussRule::legendre(low_points),
            high: GaussRule::legendre(high_points),
        }
    }

    /// Integrates f over [a, b], pre-splitting at the interior points in
    /// `splits` (typically singularity locations).
    pub fn integrate<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        splits: &[f64],
        abs_tol: f64,
        max_intervals: usize,
    ) -> Result<QuadResult> {
        assert!(b > a, "empty integration range");
        assert!(abs_tol > 0.0);
        let mut cuts: Vec<f64> = splits.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut heap = BinaryHeap::new();
        let mut total_err = 0.0;
        let mut lo = a;
        for &cut in cuts.iter().chain(core::iter::once(&b)) {
            let seg = self.eval_segment(&mut f, lo, cut);
            total_err += seg.error;
            heap.push(seg);
            lo = cut;
        }
        let mut count = heap.len();
        loop {
            if total_err <= abs_tol {
                let value = heap.iter().map(|s| s.value).sum();
                return Ok(QuadResult {
                    value,
                    error_estimate: total_err,
                    intervals: count,
                });
            }
            if count >= max_intervals {
                let value: f64 = heap.iter().map(|s| s.value).sum();
                return Err(Error::QuadratureDidNotConverge {
                    best_estimate: value,
                    residual: total_err,
                });
            }
            let worst = heap.pop().expect("heap cannot be empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval at float resolution; accept its estimate as is
                total_err -= worst.error;
                heap.push(Segment {
                    error: 0.0,
                    ..worst
                });
                continue;
            }
            let left = self.eval_segment(&mut f, worst.a, mid);
            let right = self.eval_segment(&mut f, mid, worst.b);
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            count += 1;
        }
    }

    fn eval_segment<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> Segment {
        let coarse = self.low.integrate(&mut *f, a, b);
        let fine = self.high.integrate(&mut *f, a, b);
        Segment {
            a,
            b,
            value: fine,
            error: fmath::abs(fine - coarse),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let rule = GaussRule::legendre(5);
        // degree 9 polynomial integrated exactly
        let val = rule.integrate(|x| 3.0 * x.powi(9) + x.powi(4) - 2.0 * x + 1.0, -1.0, 1.0);
        let want = 2.0 / 5.0 + 2.0; // odd terms vanish
        assert!((val - want).abs() < 1e-14, "got {val}");
    }

    #[test]
    fn gauss_nodes_match_known_values() {
        // 2-point rule: nodes +-1/sqrt(3), weights 1
        let rule = GaussRule::legendre(2);
        assert!((rule.nodes()[1] - 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
        // 3-point rule: center node weight 8/9
        let rule = GaussRule::legendre(3);
        assert_eq!(rule.nodes()[1], 0.0);
        assert!((rule.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        // int_0^1 ln(x) dx = -1, endpoint singularity
        let quad = AdaptiveQuad::default();
        let r = quad
            .integrate(|x| x.ln(), 1e-300, 1.0, &[], 1e-10, 10_000)
            .unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "got {}", r.value);
    }

    #[test]
    fn adaptive_with_interior_split() {
        // int_0^2 ln|x - 1| dx = -2, singular at interior point 1
        let quad = AdaptiveQuad::default();
        let r = quad
            .integrate(
                |x| (x - 1.0f64).abs().max(1e-300).ln(),
                0.0,
                2.0,
                &[1.0],
                1e-10,
                20_000,
            )
            .unwrap();
        assert!((r.value + 2.0).abs() < 1e-8, "got {}", r.value);
    }

    #[test]
    fn reports_nonconvergence_with_best_estimate() {
        let quad = AdaptiveQuad::default();
        let err = quad
            .integrate(
                |x| (x - 0.3f64).abs().max(1e-300).ln(),
                0.0,
                1.0,
                &[0.3],
                1e-14,
                4,
            )
            .unwrap_err();
        match err {
            Error::QuadratureDidNotConverge {
                best_estimate,
                residual,
            } => {
                assert!(best_estimate.is_finite());
                assert!(residual > 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
