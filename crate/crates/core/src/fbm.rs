//! Exact sampling of fractional Brownian motion and the normalized field.
//!
//! Two exact routes are provided: dense Cholesky factorization of the path
//! covariance (any grid, up to a size guard) and circulant embedding of the
//! stationary increments (uniform grids containing t = 0, any size). A third
//! sampler draws the normalized field directly from its own covariance
//! kernel, which keeps the per-point variance exact regardless of grid
//! resolution; the chaos-measure experiments rely on that.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft::{Complex, Fft};
use crate::fmath;
use crate::grid::{GridKind, HurstParam, TimeGrid};
use crate::kernel::{self, pow_ratio};
use crate::linalg::CholeskyFactor;
use crate::rng::{fill_standard_normal, RngSeedSpec};

/// What a path ensemble holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLabel {
    Fbm,
    NormalizedX,
}

/// Which sampling route actually produced an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Cholesky,
    Circulant,
    /// The circulant embedding was rejected and the dense route took over.
    CirculantFellBackToCholesky,
}

/// Dense factorization guard: beyond this many grid points the O(n^3) cost
/// wall makes the circulant sampler mandatory.
pub const CHOLESKY_MAX_POINTS: usize = 4096;

/// Samplers reject Hurst parameters below this floor; smaller H is exercised
/// through the closed-form kernels only.
pub const SAMPLER_H_FLOOR: f64 = 1e-3;

/// Circulant eigenvalues in [-tol * max, 0) are clipped to zero; anything
/// more negative indicates a broken embedding and triggers the fallback.
pub const EIGENVALUE_CLIP_REL_TOL: f64 = 1e-10;

/// Replica-indexed sampled paths on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    hurst: HurstParam,
    master_seed: u64,
    label: PathLabel,
    sampler: SamplerKind,
    n_replicas: usize,
    values: Vec<f64>, // row-major replica x grid
}

impl PathEnsemble {
    pub fn from_parts(
        grid: TimeGrid,
        hurst: HurstParam,
        master_seed: u64,
        label: PathLabel,
        sampler: SamplerKind,
        n_replicas: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != n_replicas * grid.len() {
            return Err(Error::EnsembleMismatch {
                reason: format!(
                    "expected {} values for {} replicas on {} points, got {}",
                    n_replicas * grid.len(),
                    n_replicas,
                    grid.len(),
                    values.len()
                ),
            });
        }
        Ok(PathEnsemble {
            grid,
            hurst,
            master_seed,
            label,
            sampler,
            n_replicas,
            values,
        })
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    #[inline]
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    #[inline]
    pub fn label(&self) -> PathLabel {
        self.label
    }

    #[inline]
    pub fn sampler(&self) -> SamplerKind {
        self.sampler
    }

    #[inline]
    pub fn n_replicas(&self) -> usize {
        self.n_replicas
    }

    /// Values of one replica, one per grid point.
    pub fn path(&self, replica: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[replica * n..(replica + 1) * n]
    }

    /// Restriction of every path to the grid points inside [lo, hi].
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<PathEnsemble> {
        let keep: Vec<usize> = self
            .grid
            .points()
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= lo && t <= hi)
            .map(|(i, _)| i)
            .collect();
        let grid = self.grid.restrict(lo, hi)?;
        let mut values = Vec::with_capacity(self.n_replicas * keep.len());
        for r in 0..self.n_replicas {
            let path = self.path(r);
            values.extend(keep.iter().map(|&i| path[i]));
        }
        PathEnsemble::from_parts(
            grid,
            self.hurst,
            self.master_seed,
            self.label,
            self.sampler,
            self.n_replicas,
            values,
        )
    }
}

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
///
/// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2, even in k. Lags
/// |k| >= 2 are evaluated through the stable power ratio so the small-H
/// second difference of logs survives in full precision.
pub fn fgn_autocovariance(k: i64, h: HurstParam) -> f64 {
    let two_h = 2.0 * h.value();
    match k.unsigned_abs() {
        0 => 1.0,
        1 => 0.5 * fmath::exp(two_h * core::f64::consts::LN_2) - 1.0,
        ak => {
            let k = ak as f64;
            h.value()
                * (pow_ratio(k + 1.0, two_h) - 2.0 * pow_ratio(k, two_h)
                    + pow_ratio(k - 1.0, two_h))
        }
    }
}

/// Covariance of fractional Brownian motion: (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
pub fn fbm_covariance(t: f64, s: f64, h: HurstParam) -> f64 {
    let two_h = 2.0 * h.value();
    let p = |x: f64| {
        let ax = fmath::abs(x);
        if ax == 0.0 {
            0.0
        } else {
            fmath::exp(two_h * fmath::ln(ax))
        }
    };
    0.5 * (p(t) + p(s) - p(t - s))
}

fn check_sampler_h(h: HurstParam) -> Result<()> {
    if h.value() < SAMPLER_H_FLOOR {
        return Err(Error::Domain {
            what: "sampler requires h >= 1e-3 (kernel-only regime below)",
            value: h.value(),
        });
    }
    Ok(())
}

fn check_cholesky_size(n: usize) -> Result<()> {
    if n > CHOLESKY_MAX_POINTS {
        return Err(Error::InvalidGrid {
            reason: format!(
                "{n} points exceed the dense-factorization guard of {CHOLESKY_MAX_POINTS}; use the circulant sampler"
            ),
        });
    }
    Ok(())
}

/// Gaussian-vector sampler from a covariance callback, with t = 0 pinned to
/// zero variance. Shared by the fBm and exact normalized-field samplers.
#[derive(Debug, Clone)]
struct PinnedGaussianSampler {
    n: usize,
    nonzero: Vec<usize>,
    factor: CholeskyFactor,
}

impl PinnedGaussianSampler {
    fn new(
        grid: &TimeGrid,
        hurst_for_error: f64,
        cov: impl Fn(f64, f64) -> f64,
        var: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        check_cholesky_size(grid.len())?;
        let pts = grid.points();
        let nonzero: Vec<usize> = (0..pts.len()).filter(|&i| pts[i] != 0.0).collect();
        let m = nonzero.len();
        let mut a = vec![0.0; m * m];
        for (row, &i) in nonzero.iter().enumerate() {
            for (col, &j) in nonzero.iter().enumerate().take(row + 1) {
                let c = if i == j {
                    var(pts[i])
                } else {
                    cov(pts[i], pts[j])
                };
                a[row * m + col] = c;
            }
        }
        let factor = CholeskyFactor::new(&a, m, hurst_for_error)?;
        Ok(PinnedGaussianSampler {
            n: pts.len(),
            nonzero,
            factor,
        })
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        let m = self.nonzero.len();
        let mut z = vec![0.0; m];
        let mut y = vec![0.0; m];
        fill_standard_normal(rng, &mut z);
        self.factor.apply(&z, &mut y);
        out.fill(0.0);
        for (row, &i) in self.nonzero.iter().enumerate() {
            out[i] = y[row];
        }
    }
}

/// Dense exact sampler for fBm on an arbitrary grid.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    grid: TimeGrid,
    hurst: HurstParam,
    inner: PinnedGaussianSampler,
}

impl CholeskySampler {
    pub fn new(grid: TimeGrid, h: HurstParam) -> Result<Self> {
        check_sampler_h(h)?;
        let inner = PinnedGaussianSampler::new(
            &grid,
            h.value(),
            |t, s| fbm_covariance(t, s, h),
            |t| fbm_covariance(t, t, h),
        )?;
        Ok(CholeskySampler {
            grid,
            hurst: h,
            inner,
        })
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    /// Draws one replica path into `out` (one value per grid point).
    pub fn sample_into(&self, seed: RngSeedSpec, out: &mut [f64]) {
        self.inner.sample_into(&mut seed.rng(), out)
    }

    pub fn sample(&self, seed: RngSeedSpec) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.sample_into(seed, &mut out);
        out
    }
}

/// Exact sampler for the normalized field itself, drawn from its covariance
/// kernel rather than from discretized fBm paths.
#[derive(Debug, Clone)]
pub struct ExactFieldSampler {
    grid: TimeGrid,
    hurst: HurstParam,
    inner: PinnedGaussianSampler,
}

impl ExactFieldSampler {
    pub fn new(grid: TimeGrid, h: HurstParam) -> Result<Self> {
        check_sampler_h(h)?;
        let inner = PinnedGaussianSampler::new(
            &grid,
            h.value(),
            |t, s| {
                kernel::kernel_kh(t, s, h)
                    .expect("grid points are distinct and nonzero")
                    .total
            },
            |t| kernel::kernel_kh_diag(t, h),
        )?;
        Ok(ExactFieldSampler {
            grid,
            hurst: h,
            inner,
        })
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn sample_into(&self, seed: RngSeedSpec, out: &mut [f64]) {
        self.inner.sample_into(&mut seed.rng(), out)
    }

    pub fn sample(&self, seed: RngSeedSpec) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.sample_into(seed, &mut out);
        out
    }
}

/// Circulant-embedding sampler for fBm on uniform grids containing t = 0.
///
/// The stationary increments are embedded in a circulant of size 2m whose
/// eigenvalues come out of one FFT of the mirrored autocovariance; each
/// replica then costs one conjugate-symmetric FFT. Increments are exact
/// fractional Gaussian noise scaled by step^H and are summed outward from
/// the zero point.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    grid: TimeGrid,
    hurst: HurstParam,
    zero_index: usize,
    step_scale: f64,
    coef_edge: [f64; 2], // sqrt(lambda / M) at k = 0 and k = m
    coef_pair: Vec<f64>, // sqrt(lambda / (2M)) at k = 1..m-1
    fft: Fft,
}

impl CirculantSampler {
    pub fn new(grid: TimeGrid, h: HurstParam) -> Result<Self> {
        check_sampler_h(h)?;
        if grid.kind() != GridKind::Uniform {
            return Err(Error::InvalidGrid {
                reason: "circulant sampler requires a uniform grid".to_string(),
            });
        }
        let zero_index = grid.zero_index().ok_or(Error::GridMissingZero)?;
        let step = grid.step().expect("uniform grid has a step");
        let m = grid.len() - 1;
        let lambda = embedding_eigenvalues(m, h)?;
        let inv_m2 = 1.0 / (2.0 * m as f64);
        let coef_edge = [
            fmath::sqrt(lambda[0] * inv_m2),
            fmath::sqrt(lambda[m] * inv_m2),
        ];
        let coef_pair = (1..m)
            .map(|k| fmath::sqrt(lambda[k] * inv_m2 * 0.5))
            .collect();
        Ok(CirculantSampler {
            grid,
            hurst: h,
            zero_index,
            step_scale: fmath::exp(h.value() * fmath::ln(step)),
            coef_edge,
            coef_pair,
            fft: Fft::new(2 * m),
        })
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn sample_into(&self, seed: RngSeedSpec, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.grid.len());
        let m = self.grid.len() - 1;
        let big = 2 * m;
        let mut rng = seed.rng();
        let mut spectrum = vec![Complex::ZERO; big];
        spectrum[0] = Complex::new(
            self.coef_edge[0] * crate::rng::standard_normal(&mut rng),
            0.0,
        );
        for k in 1..m {
            let re = crate::rng::standard_normal(&mut rng);
            let im = crate::rng::standard_normal(&mut rng);
            let a = Complex::new(self.coef_pair[k - 1] * re, self.coef_pair[k - 1] * im);
            spectrum[k] = a;
            spectrum[big - k] = a.conj();
        }
        spectrum[m] = Complex::new(
            self.coef_edge[1] * crate::rng::standard_normal(&mut rng),
            0.0,
        );
        self.fft.forward(&mut spectrum);
        // first m outputs are unit-step fGn; rescale and sum from the origin
        let z = self.zero_index;
        out[z] = 0.0;
        for j in z + 1..=m {
            out[j] = out[j - 1] + spectrum[j - 1].re * self.step_scale;
        }
        for j in (0..z).rev() {
            out[j] = out[j + 1] - spectrum[j].re * self.step_scale;
        }
    }

    pub fn sample(&self, seed: RngSeedSpec) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.sample_into(seed, &mut out);
        out
    }
}

/// Eigenvalues of the circulant embedding of m unit-step fGn increments.
///
/// Tiny negatives within [`EIGENVALUE_CLIP_REL_TOL`] of the largest
/// eigenvalue are clipped to zero; anything beyond is an error because the
/// fGn embedding is nonnegative in exact arithmetic.
pub fn embedding_eigenvalues(m: usize, h: HurstParam) -> Result<Vec<f64>> {
    assert!(m >= 1);
    let big = 2 * m;
    let mut row = vec![Complex::ZERO; big];
    for k in 0..=m {
        let c = Complex::new(fgn_autocovariance(k as i64, h), 0.0);
        row[k] = c;
        if k > 0 && k < m {
            row[big - k] = c;
        }
    }
    Fft::new(big).forward(&mut row);
    let mut lambda: Vec<f64> = row.iter().map(|c| c.re).collect();
    let max = lambda.iter().copied().fold(0.0_f64, f64::max);
    let clip = EIGENVALUE_CLIP_REL_TOL * max;
    let mut min_eig = 0.0_f64;
    for l in lambda.iter_mut() {
        if *l < min_eig {
            min_eig = *l;
        }
        if *l < 0.0 {
            if *l >= -clip {
                *l = 0.0;
            } else {
                return Err(Error::NegativeEigenvalue {
                    min_eigenvalue: min_eig,
                    tolerance: clip,
                });
            }
        }
    }
    Ok(lambda)
}

fn build_ensemble(
    grid: TimeGrid,
    h: HurstParam,
    n_replicas: usize,
    master_seed: u64,
    sampler: SamplerKind,
    mut draw: impl FnMut(RngSeedSpec, &mut [f64]),
) -> PathEnsemble {
    let n = grid.len();
    let mut values = vec![0.0; n_replicas * n];
    for r in 0..n_replicas {
        draw(
            RngSeedSpec::new(master_seed, r as u64),
            &mut values[r * n..(r + 1) * n],
        );
    }
    PathEnsemble {
        grid,
        hurst: h,
        master_seed,
        label: PathLabel::Fbm,
        sampler,
        n_replicas,
        values,
    }
}

/// Exact fBm ensemble via dense factorization.
pub fn sample_fbm_cholesky(
    grid: &TimeGrid,
    h: HurstParam,
    n_replicas: usize,
    master_seed: u64,
) -> Result<PathEnsemble> {
    let sampler = CholeskySampler::new(grid.clone(), h)?;
    Ok(build_ensemble(
        grid.clone(),
        h,
        n_replicas,
        master_seed,
        SamplerKind::Cholesky,
        |s, out| sampler.sample_into(s, out),
    ))
}

/// Exact fBm ensemble via circulant embedding, falling back to the dense
/// route if the embedding is rejected (the ensemble records which happened).
pub fn sample_fbm_circulant(
    grid: &TimeGrid,
    h: HurstParam,
    n_replicas: usize,
    master_seed: u64,
) -> Result<PathEnsemble> {
    match CirculantSampler::new(grid.clone(), h) {
        Ok(sampler) => Ok(build_ensemble(
            grid.clone(),
            h,
            n_replicas,
            master_seed,
            SamplerKind::Circulant,
            |s, out| sampler.sample_into(s, out),
        )),
        Err(Error::NegativeEigenvalue { .. }) => {
            let sampler = CholeskySampler::new(grid.clone(), h)?;
            let mut ens = build_ensemble(
                grid.clone(),
                h,
                n_replicas,
                master_seed,
                SamplerKind::CirculantFellBackToCholesky,
                |s, out| sampler.sample_into(s, out),
            );
            ens.sampler = SamplerKind::CirculantFellBackToCholesky;
            Ok(ens)
        }
        Err(e) => Err(e),
    }
}

/// Exact ensemble of the normalized field drawn from its covariance kernel.
pub fn sample_x_exact(
    grid: &TimeGrid,
    h: HurstParam,
    n_replicas: usize,
    master_seed: u64,
) -> Result<PathEnsemble> {
    let sampler = ExactFieldSampler::new(grid.clone(), h)?;
    let mut ens = build_ensemble(
        grid.clone(),
        h,
        n_replicas,
        master_seed,
        SamplerKind::Cholesky,
        |s, out| sampler.sample_into(s, out),
    );
    ens.label = PathLabel::NormalizedX;
    Ok(ens)
}

/// Normalized field values from one fBm path: (B_t - mean of B over [0, t])
/// divided by sqrt(H), with the running mean taken by the trapezoidal rule
/// over the grid points between 0 and t (both signs of t are supported).
pub fn normalize_values(grid: &TimeGrid, path: &[f64], h: HurstParam) -> Result<Vec<f64>> {
    let z = grid.zero_index().ok_or(Error::GridMissingZero)?;
    let pts = grid.points();
    assert_eq!(path.len(), pts.len());
    let inv_sqrt_h = 1.0 / fmath::sqrt(h.value());
    let mut out = vec![0.0; pts.len()];
    // signed running integral of the path from 0 to t_j
    let mut integral = 0.0;
    for j in z + 1..pts.len() {
        integral += (pts[j] - pts[j - 1]) * 0.5 * (path[j - 1] + path[j]);
        out[j] = (path[j] - integral / pts[j]) * inv_sqrt_h;
    }
    integral = 0.0;
    for j in (0..z).rev() {
        integral -= (pts[j + 1] - pts[j]) * 0.5 * (path[j] + path[j + 1]);
        out[j] = (path[j] - integral / pts[j]) * inv_sqrt_h;
    }
    out[z] = 0.0;
    Ok(out)
}

/// Applies [`normalize_values`] to every replica of an fBm ensemble.
pub fn normalize_to_x(ensemble: &PathEnsemble) -> Result<PathEnsemble> {
    if ensemble.label != PathLabel::Fbm {
        return Err(Error::EnsembleMismatch {
            reason: "normalize_to_x expects an fbm-labelled ensemble".to_string(),
        });
    }
    let n = ensemble.grid.len();
    let mut values = Vec::with_capacity(ensemble.n_replicas * n);
    for r in 0..ensemble.n_replicas {
        values.extend(normalize_values(
            &ensemble.grid,
            ensemble.path(r),
            ensemble.hurst,
        )?);
    }
    Ok(PathEnsemble {
        grid: ensemble.grid.clone(),
        hurst: ensemble.hurst,
        master_seed: ensemble.master_seed,
        label: PathLabel::NormalizedX,
        sampler: ensemble.sampler,
        n_replicas: ensemble.n_replicas,
        values,
    })
}
