//! The approximate volatility measure exp(gamma X - gamma^2/2 Var) dt on
//! [delta, 1], its ball masses, moment-scaling estimation and the
//! Frisch-Parisi identity.
//!
//! Measures are built from exactly sampled normalized-field paths so that
//! the per-point variance entering the normalization is the same closed form
//! the weights subtract; the lognormal mean of every cell weight is then
//! exactly the cell length.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fbm::{PathEnsemble, PathLabel};
use crate::fmath;
use crate::grid::{HurstParam, TimeGrid};
use crate::kernel::{i24_centered, kernel_kh_diag};
use crate::linalg::CholeskyFactor;
use crate::quad::GaussRule;
use crate::rng::RngSeedSpec;

pub const GAMMA_MAX: f64 = core::f64::consts::SQRT_2;

/// Parameters of the approximate volatility measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GmcParams {
    gamma: f64,
    delta: f64,
    hurst: HurstParam,
    grid: TimeGrid,
}

impl GmcParams {
    /// Uniform measure grid with `n_cells` cells on [delta, 1].
    pub fn new(gamma: f64, delta: f64, h: HurstParam, n_cells: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < GAMMA_MAX) {
            return Err(Error::InvalidGmcParams {
                reason: format!("gamma must lie in (0, sqrt(2)), got {gamma}"),
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidGmcParams {
                reason: format!("delta must lie in (0, 1), got {delta}"),
            });
        }
        if n_cells < 2 {
            return Err(Error::InvalidGmcParams {
                reason: format!("need at least 2 cells, got {n_cells}"),
            });
        }
        let grid = TimeGrid::uniform(delta, 1.0, n_cells + 1)?;
        Ok(GmcParams {
            gamma,
            delta,
            hurst: h,
            grid,
        })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.grid.len() - 1
    }

    #[inline]
    pub fn cell_width(&self) -> f64 {
        self.grid.step().expect("measure grid is uniform")
    }

    /// Log weight exponent baseline: -gamma^2/2 E[X_t^2] + ln(cell width),
    /// per cell left endpoint.
    fn log_weight_baseline(&self) -> Vec<f64> {
        let ln_dt = fmath::ln(self.cell_width());
        let g2 = 0.5 * self.gamma * self.gamma;
        self.grid.points()[..self.n_cells()]
            .iter()
            .map(|&t| -g2 * kernel_kh_diag(t, self.hurst) + ln_dt)
            .collect()
    }
}

/// One realization of the discretized measure: a nonnegative weight per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GmcMeasureSample {
    params: GmcParams,
    weights: Vec<f64>,
}

impl GmcMeasureSample {
    #[inline]
    pub fn params(&self) -> &GmcParams {
        &self.params
    }

    /// Weight of the cell [t_i, t_{i+1}).
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Cell averages of the normalized field over a measure grid: one Gaussian
/// per cell with covariance avg over cell_i x cell_j of K_H.
///
/// Point evaluations of the field are useless for moment experiments at
/// small H: a single point carries variance ~ 1/(2H) while the
/// log-correlation at grid resolution is only ~ log(1/step), so discrete
/// q > 1 moments get swamped by one-cell atoms. Averaging the field over
/// each cell is the standard mollification for chaos-measure simulation and
/// keeps E[exp(gamma Y - gamma^2 V / 2)] = 1 exactly per cell.
///
/// The covariance splits into the stationary singular part
/// -(1/2H)|u - v|^{2H}, whose cell-pair average is an exact second
/// difference of z^{2H+2} / ((2H+1)(2H+2)), and a smooth remainder handled
/// by a 3x3 Gauss product.
#[derive(Debug, Clone)]
pub struct AveragedFieldSampler {
    n_cells: usize,
    factor: CholeskyFactor,
    variances: Vec<f64>,
}

impl AveragedFieldSampler {
    pub fn new(grid: &TimeGrid, h: HurstParam) -> Result<Self> {
        let step = grid.step().ok_or_else(|| Error::InvalidGrid {
            reason: "averaged field sampler requires a uniform grid".to_string(),
        })?;
        if grid.first() <= 0.0 {
            return Err(Error::InvalidGrid {
                reason: "averaged field sampler requires cells strictly right of 0".to_string(),
            });
        }
        let n_cells = grid.len() - 1;
        let hv = h.value();
        let two_h = 2.0 * hv;

        // exact average of |u - v|^{2H} over a cell pair at lag k
        let f22 = |z: f64| fmath::exp((two_h + 2.0) * fmath::ln(z));
        let antider = |z: f64| {
            if z == 0.0 {
                0.0
            } else {
                f22(z) / ((two_h + 1.0) * (two_h + 2.0))
            }
        };
        let stationary_avg = |k: usize| -> f64 {
            if k == 0 {
                2.0 * antider(step) / (step * step)
            } else {
                let kf = k as f64;
                (antider((kf + 1.0) * step) - 2.0 * antider(kf * step) + antider((kf - 1.0) * step))
                    / (step * step)
            }
        };

        // smooth remainder I_{2,4}(u, v) by tensor Gauss over the cell pair
        let rule = GaussRule::legendre(3);
        let center = 1.0 / (hv * (2.0 * hv + 2.0));
        let i24 = |u: f64, v: f64| -> f64 {
            if u == v {
                kernel_kh_diag(u, h)
            } else {
                i24_centered(u, v, hv).expect("cells avoid the axes") + center
            }
        };
        let pts = grid.points();
        let half = 0.5 * step;
        let mut cov = alloc::vec![0.0; n_cells * n_cells];
        for i in 0..n_cells {
            let ci = pts[i] + half;
            for j in 0..=i {
                let cj = pts[j] + half;
                let mut smooth = 0.0;
                for (&gi, &wi) in rule.nodes().iter().zip(rule.weights().iter()) {
                    for (&gj, &wj) in rule.nodes().iter().zip(rule.weights().iter()) {
                        smooth += wi * wj * i24(ci + half * gi, cj + half * gj);
                    }
                }
                smooth *= 0.25;
                cov[i * n_cells + j] = -stationary_avg(i - j) / two_h + smooth;
            }
        }
        let variances = (0..n_cells).map(|i| cov[i * n_cells + i]).collect();
        let factor = CholeskyFactor::new(&cov, n_cells, hv)?;
        Ok(AveragedFieldSampler {
            n_cells,
            factor,
            variances,
        })
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Exact variance of each cell average.
    #[inline]
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// One replica of cell-averaged field values.
    pub fn sample_into(&self, seed: RngSeedSpec, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_cells);
        let mut rng = seed.rng();
        let mut z = alloc::vec![0.0; self.n_cells];
        crate::rng::fill_standard_normal(&mut rng, &mut z);
        self.factor.apply(&z, out);
    }
}

/// Measure sampler built on the cell-averaged field: weights
/// step * exp(gamma Y_i - gamma^2 V_i / 2) with V_i the exact variance of
/// the cell average, so every weight has mean exactly the cell width.
#[derive(Debug, Clone)]
pub struct GmcSampler {
    params: GmcParams,
    field: AveragedFieldSampler,
    baseline: Vec<f64>, // -gamma^2/2 V_i + ln step
}

impl GmcSampler {
    pub fn new(params: GmcParams) -> Result<Self> {
        let field = AveragedFieldSampler::new(params.grid(), params.hurst())?;
        let ln_dt = fmath::ln(params.cell_width());
        let g2 = 0.5 * params.gamma() * params.gamma();
        let baseline = field.variances().iter().map(|&v| -g2 * v + ln_dt).collect();
        Ok(GmcSampler {
            params,
            field,
            baseline,
        })
    }

    #[inline]
    pub fn params(&self) -> &GmcParams {
        &self.params
    }

    /// Log weights of one replica, written over `out` (one per cell).
    pub fn sample_log_weights_into(&self, seed: RngSeedSpec, out: &mut [f64]) {
        self.field.sample_into(seed, out);
        let gamma = self.params.gamma();
        for (w, &b) in out.iter_mut().zip(self.baseline.iter()) {
            *w = gamma * *w + b;
        }
    }

    /// One measure realization.
    pub fn sample(&self, seed: RngSeedSpec) -> GmcMeasureSample {
        let mut ln_w = alloc::vec![0.0; self.field.n_cells()];
        self.sample_log_weights_into(seed, &mut ln_w);
        GmcMeasureSample {
            params: self.params.clone(),
            weights: ln_w.iter().map(|&l| fmath::exp(l)).collect(),
        }
    }
}

/// Builds the measure realization for one replica of a normalized-field
/// ensemble on the parameter grid: left-endpoint exponential weights with
/// the exact closed-form variance in the normalization.
///
/// This is the plain Riemann-sum discretization; its mean mass is exact,
/// but q > 1 moment experiments should sample through [`GmcSampler`], whose
/// cell-averaged weights keep the discrete moments on the continuum scaling
/// curve (see [`AveragedFieldSampler`]).
pub fn gmc_sample(
    params: &GmcParams,
    ensemble: &PathEnsemble,
    replica: usize,
) -> Result<GmcMeasureSample> {
    if ensemble.label() != PathLabel::NormalizedX {
        return Err(Error::EnsembleMismatch {
            reason: "gmc_sample expects a normalized_x ensemble".to_string(),
        });
    }
    if ensemble.grid() != params.grid() {
        return Err(Error::EnsembleMismatch {
            reason: "ensemble grid does not match the measure grid".to_string(),
        });
    }
    if ensemble.hurst() != params.hurst() {
        return Err(Error::EnsembleMismatch {
            reason: "ensemble Hurst parameter does not match the measure parameters".to_string(),
        });
    }
    let x = ensemble.path(replica);
    let baseline = params.log_weight_baseline();
    let weights = baseline
        .iter()
        .zip(x.iter())
        .map(|(&b, &xi)| fmath::exp(params.gamma * xi + b))
        .collect();
    Ok(GmcMeasureSample {
        params: params.clone(),
        weights,
    })
}

/// Measure of the open ball (x - r, x + r): cell weights prorated linearly
/// over the overlapped fraction of each cell.
pub fn ball_mass(sample: &GmcMeasureSample, x: f64, r: f64) -> f64 {
    assert!(r > 0.0, "ball radius must be positive");
    let grid = sample.params.grid();
    let dt = sample.params.cell_width();
    let pts = grid.points();
    let (lo, hi) = (x - r, x + r);
    let mut acc = 0.0;
    for (i, w) in sample.weights.iter().enumerate() {
        let c0 = pts[i];
        let c1 = c0 + dt;
        let overlap = (hi.min(c1) - lo.max(c0)).max(0.0);
        if overlap > 0.0 {
            acc += w * (overlap / dt);
        }
    }
    acc
}

/// Theoretical moment-scaling exponent zeta(q) = (1 + gamma^2/2) q - gamma^2 q^2 / 2.
///
/// Restricted to the positive part of the moment-existence range.
pub fn zeta_theory(q: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < GAMMA_MAX) {
        return Err(Error::Domain {
            what: "gamma must lie in (0, sqrt(2))",
            value: gamma,
        });
    }
    let qmax = 2.0 / (gamma * gamma);
    if !(q > 0.0 && q < qmax) {
        return Err(Error::Domain {
            what: "q must lie in (0, 2/gamma^2)",
            value: q,
        });
    }
    Ok(zeta_quadratic(q, gamma))
}

/// The zeta quadratic without domain restriction (used inside the
/// Frisch-Parisi infimum, which ranges over all real p).
#[inline]
fn zeta_quadratic(q: f64, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    (1.0 + 0.5 * g2) * q - 0.5 * g2 * q * q
}

/// Result of the Frisch-Parisi identity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrischParisiDim {
    /// inf_p { p (1 + (1/2 - r) gamma^2) - zeta(p) + 1 } found numerically.
    pub dim_numeric: f64,
    /// Closed form 1 - gamma^2 r^2 / 2.
    pub dim_closed_form: f64,
    /// Minimizing p of the numeric search.
    pub argmin_p: f64,
}

/// Golden-section minimization of the Legendre-type expression over
/// p in [-10, 10], compared against the closed-form dimension.
///
/// ```
/// use fbmzero_core::gmc::frisch_parisi_dim;
/// let fp = frisch_parisi_dim(1.0, 1.0)?;
/// assert!((fp.dim_closed_form - 0.5).abs() < 1e-12);
/// assert!((fp.dim_numeric - fp.dim_closed_form).abs() < 1e-6);
/// # Ok::<(), fbmzero_core::Error>(())
/// ```
pub fn frisch_parisi_dim(gamma: f64, r: f64) -> Result<FrischParisiDim> {
    if !(gamma > 0.0 && gamma < GAMMA_MAX) {
        return Err(Error::Domain {
            what: "gamma must lie in (0, sqrt(2))",
            value: gamma,
        });
    }
    if !(r > 0.0 && r < GAMMA_MAX / gamma) {
        return Err(Error::Domain {
            what: "r must lie in (0, sqrt(2)/gamma)",
            value: r,
        });
    }
    let holder = 1.0 + (0.5 - r) * gamma * gamma;
    let objective = |p: f64| p * holder - zeta_quadratic(p, gamma) + 1.0;

    let (mut a, mut b) = (-10.0_f64, 10.0_f64);
    let inv_phi = 0.5 * (fmath::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let argmin_p = 0.5 * (a + b);
    Ok(FrischParisiDim {
        dim_numeric: objective(argmin_p),
        dim_closed_form: 1.0 - 0.5 * gamma * gamma * r * r,
        argmin_p,
    })
}

/// Where scaling regressions center their balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallCenters {
    /// The single domain midpoint (1 + delta) / 2.
    Midpoint,
    /// Five interior points, averaging the moments before regression.
    FiveInterior,
}

/// Estimated moment-scaling exponents with their regression diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub q_values: Vec<f64>,
    pub zeta_hat: Vec<f64>,
    pub zeta_se: Vec<f64>,
    pub zeta_theory: Vec<f64>,
    pub r_range: Vec<f64>,
    pub regression_r2: Vec<f64>,
    pub n_replicas: usize,
}

/// Monte Carlo estimate of the scaling exponents: regress the log of the
/// replica-averaged ball-mass moments on log r (ball at the domain
/// midpoint), one slope per q.
pub fn estimate_spectrum(
    params: &GmcParams,
    q_list: &[f64],
    r_list: &[f64],
    n_replicas: usize,
    master_seed: u64,
) -> Result<SpectrumEstimate> {
    estimate_spectrum_with_centers(
        params,
        q_list,
        r_list,
        n_replicas,
        master_seed,
        BallCenters::Midpoint,
    )
}

pub fn estimate_spectrum_with_centers(
    params: &GmcParams,
    q_list: &[f64],
    r_list: &[f64],
    n_replicas: usize,
    master_seed: u64,
    centers: BallCenters,
) -> Result<SpectrumEstimate> {
    let qmax = 2.0 / (params.gamma() * params.gamma());
    for &q in q_list {
        if !(q > 0.0 && q < qmax) {
            return Err(Error::Domain {
                what: "q must lie in (0, 2/gamma^2)",
                value: q,
            });
        }
    }
    if r_list.len() < 3 {
        return Err(Error::Domain {
            what: "need at least 3 radii for a regression",
            value: r_list.len() as f64,
        });
    }
    for w in r_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Domain {
                what: "radii must be strictly decreasing",
                value: w[1],
            });
        }
    }
    let dt = params.cell_width();
    let interior = 0.25 * (1.0 - params.delta());
    for &r in r_list {
        if !(r > 4.0 * dt && r < interior) {
            return Err(Error::Domain {
                what: "radii must be resolved and interior: 4*step < r < (1-delta)/4",
                value: r,
            });
        }
    }
    if n_replicas < 8 {
        return Err(Error::Domain {
            what: "need at least 8 replicas",
            value: n_replicas as f64,
        });
    }

    let center_points: Vec<f64> = match centers {
        BallCenters::Midpoint => vec![0.5 * (1.0 + params.delta())],
        BallCenters::FiveInterior => {
            let (d, span) = (params.delta(), 1.0 - params.delta());
            (1..=5).map(|i| d + span * i as f64 / 6.0).collect()
        }
    };

    // cell index windows and end-cell fractions per (center, radius)
    let pts = params.grid().points();
    let n_cells = params.n_cells();
    struct Window {
        first: usize,
        last: usize, // inclusive
        ln_frac_first: f64,
        ln_frac_last: f64,
    }
    let mut windows = Vec::with_capacity(center_points.len() * r_list.len());
    for &c in &center_points {
        for &r in r_list {
            let lo = c - r;
            let hi = c + r;
            let first = fmath::floor((lo - params.delta()) / dt).max(0.0) as usize;
            let last = (fmath::ceil((hi - params.delta()) / dt) as usize).min(n_cells) - 1;
            let frac = |i: usize| {
                let c0 = pts[i];
                let c1 = c0 + dt;
                ((hi.min(c1) - lo.max(c0)).max(0.0) / dt).min(1.0)
            };
            windows.push(Window {
                first,
                last,
                ln_frac_first: fmath::ln(frac(first)),
                ln_frac_last: fmath::ln(frac(last)),
            });
        }
    }

    let sampler = GmcSampler::new(params.clone())?;
    let gamma = params.gamma();
    let mut ln_w = vec![0.0; n_cells];
    // ln ball mass per (window, replica)
    let mut ln_mass = vec![vec![0.0_f64; n_replicas]; windows.len()];
    for rep in 0..n_replicas {
        sampler.sample_log_weights_into(RngSeedSpec::new(master_seed, rep as u64), &mut ln_w);
        for (w, masses) in windows.iter().zip(ln_mass.iter_mut()) {
            masses[rep] = log_sum_window(&ln_w, w.first, w.last, w.ln_frac_first, w.ln_frac_last);
        }
    }

    // regression per q: log of MC-averaged mass^q on log r
    let n_centers = center_points.len();
    let xs: Vec<f64> = r_list.iter().map(|&r| fmath::ln(r)).collect();
    let mut zeta_hat = Vec::with_capacity(q_list.len());
    let mut zeta_se = Vec::with_capacity(q_list.len());
    let mut zeta_th = Vec::with_capacity(q_list.len());
    let mut r2s = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let mut ys = Vec::with_capacity(r_list.len());
        for (ri, &r) in r_list.iter().enumerate() {
            // average the moment over centers and replicas in log space
            let mut max_ln = f64::NEG_INFINITY;
            for ci in 0..n_centers {
                for &lm in &ln_mass[ci * r_list.len() + ri] {
                    max_ln = max_ln.max(q * lm);
                }
            }
            if !max_ln.is_finite() {
                return Err(Error::NonFiniteMoment { q, r });
            }
            let mut acc = 0.0;
            for ci in 0..n_centers {
                for &lm in &ln_mass[ci * r_list.len() + ri] {
                    acc += fmath::exp(q * lm - max_ln);
                }
            }
            let ln_moment = max_ln + fmath::ln(acc / (n_centers * n_replicas) as f64);
            if !ln_moment.is_finite() {
                return Err(Error::NonFiniteMoment { q, r });
            }
            ys.push(ln_moment);
        }
        let (slope, se, r2) = ols_slope(&xs, &ys);
        zeta_hat.push(slope);
        zeta_se.push(se);
        r2s.push(r2);
        zeta_th.push(zeta_quadratic(q, gamma));
    }
    Ok(SpectrumEstimate {
        q_values: q_list.to_vec(),
        zeta_hat,
        zeta_se,
        zeta_theory: zeta_th,
        r_range: r_list.to_vec(),
        regression_r2: r2s,
        n_replicas,
    })
}

fn log_sum_window(ln_w: &[f64], first: usize, last: usize, ln_f0: f64, ln_f1: f64) -> f64 {
    let term = |i: usize| {
        ln_w[i]
            + if i == first {
                ln_f0
            } else if i == last {
                ln_f1
            } else {
                0.0
            }
    };
    let mut max = f64::NEG_INFINITY;
    for i in first..=last {
        max = max.max(term(i));
    }
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for i in first..=last {
        acc += fmath::exp(term(i) - max);
    }
    max + fmath::ln(acc)
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let rss = (syy - slope * sxy).max(0.0);
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let se = fmath::sqrt(rss / dof / sxx);
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    (slope, se, r2)
}

/// Monte Carlo mean and standard error of the total measure mass, sampled
/// through the cell-averaged route.
pub fn mc_total_mass(
    params: &GmcParams,
    n_replicas: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    assert!(n_replicas >= 2);
    let sampler = GmcSampler::new(params.clone())?;
    let mut ln_w = vec![0.0; params.n_cells()];
    let mut masses = Vec::with_capacity(n_replicas);
    for rep in 0..n_replicas {
        sampler.sample_log_weights_into(RngSeedSpec::new(master_seed, rep as u64), &mut ln_w);
        masses.push(ln_w.iter().map(|&l| fmath::exp(l)).sum::<f64>());
    }
    let n = n_replicas as f64;
    let mean = masses.iter().sum::<f64>() / n;
    let var = masses.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, fmath::sqrt(var / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::sample_x_exact;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn gamma_boundary_enforced() {
        assert!(GmcParams::new(1.4, 0.1, hp(0.05), 16).is_ok());
        assert!(GmcParams::new(1.42, 0.1, hp(0.05), 16).is_err());
        assert!(GmcParams::new(0.0, 0.1, hp(0.05), 16).is_err());
        assert!(GmcParams::new(0.5, 0.0, hp(0.05), 16).is_err());
        assert!(GmcParams::new(0.5, 1.0, hp(0.05), 16).is_err());
    }

    #[test]
    fn vanishing_gamma_recovers_lebesgue_cells() {
        // gamma -> 0: weights -> dt exactly in the limit; check tiny gamma
        let params = GmcParams::new(1e-9, 0.1, hp(0.05), 32).unwrap();
        let ens = sample_x_exact(params.grid(), params.hurst(), 1, 11).unwrap();
        let m = gmc_sample(&params, &ens, 0).unwrap();
        let dt = params.cell_width();
        for &w in m.weights() {
            assert!((w - dt).abs() < 1e-7 * dt);
        }
        assert!((m.total_mass() - 0.9).abs() < 1e-7);
    }

    #[test]
    fn ball_mass_partition_and_extremes() {
        let params = GmcParams::new(0.8, 0.1, hp(0.05), 64).unwrap();
        let ens = sample_x_exact(params.grid(), params.hurst(), 1, 3).unwrap();
        let m = gmc_sample(&params, &ens, 0).unwrap();
        let total = m.total_mass();
        // ball containing the whole domain
        assert!((ball_mass(&m, 0.55, 10.0) - total).abs() < 1e-12 * total);
        // disjoint ball
        assert_eq!(ball_mass(&m, 5.0, 0.5), 0.0);
        // partition: ball + prorated complement = total
        let (x, r) = (0.493, 0.121);
        let inside = ball_mass(&m, x, r);
        let dt = params.cell_width();
        let pts = params.grid().points();
        let mut outside = 0.0;
        for (i, w) in m.weights().iter().enumerate() {
            let c0 = pts[i];
            let c1 = c0 + dt;
            let overlap = ((x + r).min(c1) - (x - r).max(c0)).max(0.0);
            outside += w * (1.0 - overlap / dt);
        }
        assert!((inside + outside - total).abs() < 1e-12 * total);
    }

    #[test]
    fn zeta_theory_values_and_domain() {
        assert!((zeta_theory(1.0, 0.9).unwrap() - 1.0).abs() < 1e-15);
        assert!((zeta_theory(2.0, 0.5).unwrap() - 1.75).abs() < 1e-15);
        // q -> 0 limit is 0
        assert!(zeta_theory(1e-12, 0.5).unwrap().abs() < 1e-11);
        assert!(zeta_theory(8.0, 0.5).is_err()); // boundary 2/gamma^2 = 8
        assert!(zeta_theory(7.99, 0.5).is_ok());
        assert!(zeta_theory(-1.0, 0.5).is_err());
    }

    #[test]
    fn frisch_parisi_identity_point() {
        let fp = frisch_parisi_dim(1.0, 1.0).unwrap();
        assert!((fp.dim_closed_form - 0.5).abs() < 1e-15);
        assert!((fp.dim_numeric - 0.5).abs() < 1e-9);
        assert!((fp.argmin_p - 1.0).abs() < 1e-6);
        // r -> 0 pushes the dimension to 1
        let fp = frisch_parisi_dim(0.7, 1e-6).unwrap();
        assert!((fp.dim_closed_form - 1.0).abs() < 1e-11);
        assert!(frisch_parisi_dim(1.5, 0.5).is_err());
        assert!(frisch_parisi_dim(0.5, 3.0).is_err());
    }

    #[test]
    fn spectrum_rejects_bad_radii_and_q() {
        let params = GmcParams::new(0.5, 0.1, hp(0.05), 64).unwrap();
        let dt = params.cell_width();
        // too small (below 4 steps)
        assert!(estimate_spectrum(&params, &[1.0], &[0.2, 0.1, 2.0 * dt], 16, 0).is_err());
        // not decreasing
        assert!(estimate_spectrum(&params, &[1.0], &[0.1, 0.2, 0.15], 16, 0).is_err());
        // q outside the moment range
        assert!(estimate_spectrum(&params, &[9.0], &[0.2, 0.15, 0.1], 16, 0).is_err());
        // too-close-to-boundary radius
        assert!(estimate_spectrum(&params, &[1.0], &[0.24, 0.2, 0.1], 16, 0).is_err());
    }
}
