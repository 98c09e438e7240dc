//! Shared oracle machinery for integration tests.
//!
//! The quadrature oracle here is tanh-sinh (double-exponential) with level
//! doubling, deliberately independent of the Gauss-Legendre machinery inside
//! the crate: the two routes never share code, so agreement is evidence.

#![allow(dead_code)]

/// Double-exponential quadrature of f over [a, b]. Handles integrable
/// endpoint singularities (logs, mild powers). Interior singularities must
/// be split beforehand.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(b > a);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut prev = f64::NAN;
    for level in 3..=12 {
        let h = 0.5f64.powi(level);
        let mut acc = 0.0;
        let mut k: i64 = 0;
        let mut tiny_streak = 0;
        loop {
            let t = k as f64 * h;
            let sinh_t = t.sinh();
            let arg = core::f64::consts::FRAC_PI_2 * sinh_t;
            let x = arg.tanh();
            let hi_pt = mid + half * x;
            let lo_pt = mid - half * x;
            // stop before the mapped points collide with the endpoints,
            // where the integrand may be singular
            if x >= 1.0 || hi_pt >= b || lo_pt <= a {
                break;
            }
            let w = core::f64::consts::FRAC_PI_2 * t.cosh() / arg.cosh().powi(2);
            if !w.is_finite() || w < 1e-320 {
                break;
            }
            let term = if k == 0 {
                w * f(mid)
            } else {
                w * (f(hi_pt) + f(lo_pt))
            };
            acc += term;
            if k > 0 && term.abs() < 1e-17 * acc.abs().max(1e-30) {
                tiny_streak += 1;
                if tiny_streak >= 3 && t > 3.0 {
                    break;
                }
            } else {
                tiny_streak = 0;
            }
            k += 1;
        }
        let integral = acc * h * half;
        if level > 3 && (integral - prev).abs() <= tol {
            return integral;
        }
        prev = integral;
    }
    prev
}

/// tanh-sinh over [a, b] pre-split at the given interior points.
pub fn tanh_sinh_split<F: Fn(f64) -> f64 + Copy>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: f64,
) -> f64 {
    let mut cuts: Vec<f64> = splits.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = 0.0;
    let mut lo = a;
    let per_seg_tol = tol / (cuts.len() + 1) as f64;
    for cut in cuts.into_iter().chain(std::iter::once(b)) {
        acc += tanh_sinh(f, lo, cut, per_seg_tol);
        lo = cut;
    }
    acc
}

/// Average of f over the interval between 0 and t (whichever side), the
/// recurring (1/t) int_0^t form of the kernel integrals.
pub fn average_over(f: impl Fn(f64) -> f64 + Copy, t: f64, splits: &[f64], tol: f64) -> f64 {
    let (lo, hi) = if t > 0.0 { (0.0, t) } else { (t, 0.0) };
    tanh_sinh_split(f, lo, hi, splits, tol * (hi - lo)) / (hi - lo)
}

/// The kernel building block F(x) = |x|^{2H} / (2H), or log |x| at the
/// limit (encoded as two_h == 0).
pub fn point_fn(x: f64, two_h: f64) -> f64 {
    let ax = x.abs();
    if two_h == 0.0 {
        ax.ln()
    } else {
        ax.powf(two_h) / two_h
    }
}

/// Quadrature oracle for the four kernel terms at (t, s): the defining
/// single and double integrals, not the closed forms. two_h == 0 gives the
/// limit-kernel terms.
pub fn oracle_kernel_terms(t: f64, s: f64, two_h: f64) -> (f64, f64, f64, f64) {
    let tol = 1e-11;
    let i1 = -point_fn(t - s, two_h);
    let i2 = average_over(|u| point_fn(s - u, two_h), t, &[s], tol);
    let i3 = average_over(|v| point_fn(t - v, two_h), s, &[t], tol);
    // inner average over u between 0 and t, split at u = v; outer over v
    let inner = |v: f64| average_over(|u| point_fn(u - v, two_h), t, &[v], 1e-12);
    let i4 = -average_over(inner, s, &[], 10.0 * tol);
    (i1, i2, i3, i4)
}

/// Quadrature oracle for g(t, s): the three averaged-log integrals from the
/// limit covariance.
pub fn oracle_g(t: f64, s: f64) -> f64 {
    let (_, i2, i3, i4) = oracle_kernel_terms(t, s, 0.0);
    i2 + i3 + i4
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() - 1) as f64
}

/// Standard error of the sample variance of a Gaussian sample.
pub fn variance_se(var: f64, n: usize) -> f64 {
    var * (2.0 / (n as f64 - 1.0)).sqrt()
}

/// Standard error of the sample covariance of a jointly Gaussian sample.
pub fn covariance_se(var_x: f64, var_y: f64, cov: f64, n: usize) -> f64 {
    ((var_x * var_y + cov * cov) / (n as f64 - 1.0)).sqrt()
}
