//! Monte Carlo statistics of the exact samplers against closed forms and
//! against each other.

mod common;

use common::*;
use fbmzero_core::fbm::*;
use fbmzero_core::{HurstParam, RngSeedSpec, TimeGrid};
use rayon::prelude::*;

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

/// Sample covariance matrix over replicas drawn in parallel.
fn sample_cov_matrix(
    sample: impl Fn(RngSeedSpec, &mut [f64]) + Sync,
    n_points: usize,
    n_replicas: usize,
    master_seed: u64,
) -> Vec<f64> {
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..n_replicas)
        .into_par_iter()
        .fold(
            || (vec![0.0; n_points * n_points], vec![0.0; n_points]),
            |(mut acc, mut buf), r| {
                sample(RngSeedSpec::new(master_seed, r as u64), &mut buf);
                for i in 0..n_points {
                    for j in 0..=i {
                        acc[i * n_points + j] += buf[i] * buf[j];
                    }
                }
                (acc, buf)
            },
        )
        .map(|(acc, _)| (acc, Vec::new()))
        .collect();
    let mut cov = vec![0.0; n_points * n_points];
    for (acc, _) in chunks {
        for (c, a) in cov.iter_mut().zip(acc.iter()) {
            *c += a;
        }
    }
    // paths are centered by construction; use the raw second moment
    for v in cov.iter_mut() {
        *v /= n_replicas as f64;
    }
    for i in 0..n_points {
        for j in 0..i {
            cov[j * n_points + i] = cov[i * n_points + j];
        }
    }
    cov
}

fn cov_se(cov: &[f64], n_points: usize, i: usize, j: usize, n: usize) -> f64 {
    let vii = cov[i * n_points + i];
    let vjj = cov[j * n_points + j];
    let vij = cov[i * n_points + j];
    ((vii * vjj + vij * vij) / n as f64).sqrt()
}

#[test]
fn circulant_covariance_matches_closed_form_and_cholesky() {
    // two-sided uniform grid through zero
    let h = hp(0.1);
    let grid = TimeGrid::uniform_indexed(1.0 / 64.0, -32, 96).unwrap();
    let n = grid.len();
    let n_rep = 20_000;
    let circ = CirculantSampler::new(grid.clone(), h).unwrap();
    let chol = CholeskySampler::new(grid.clone(), h).unwrap();
    let cov_circ = sample_cov_matrix(|s, out| circ.sample_into(s, out), n, n_rep, 11);
    let cov_chol = sample_cov_matrix(|s, out| chol.sample_into(s, out), n, n_rep, 12);

    let pts = grid.points();
    let mut worst_closed = 0.0_f64;
    let mut worst_cross = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            let want = fbm_covariance(pts[i], pts[j], h);
            let se = cov_se(&cov_circ, n, i, j, n_rep).max(1e-12);
            let dev = (cov_circ[i * n + j] - want).abs() / se;
            worst_closed = worst_closed.max(dev);
            let se2 = (se * se + cov_se(&cov_chol, n, i, j, n_rep).powi(2)).sqrt();
            let cross = (cov_circ[i * n + j] - cov_chol[i * n + j]).abs() / se2;
            worst_cross = worst_cross.max(cross);
        }
    }
    // worst standardized deviation over ~8k correlated entries; 4 is the
    // per-entry budget, whole-matrix max gets a little slack
    assert!(
        worst_closed < 6.0,
        "worst closed-form deviation {worst_closed} SE"
    );
    assert!(
        worst_cross < 6.0,
        "worst circulant/cholesky deviation {worst_cross} SE"
    );
    // and the spec's pointwise example: sample covariance at (0.5, 1.0)
    let (i5, i10) = (
        pts.iter().position(|&t| (t - 0.5).abs() < 1e-12).unwrap(),
        pts.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap(),
    );
    let want = fbm_covariance(0.5, 1.0, h);
    let got = cov_circ[i10 * n + i5];
    let se = cov_se(&cov_circ, n, i10, i5, n_rep);
    assert!(
        (got - want).abs() <= 4.0 * se,
        "cov(0.5,1.0): {got} vs {want} (se {se})"
    );
}

#[test]
fn self_similarity_and_increment_stationarity() {
    let h = hp(0.3);
    let grid = TimeGrid::uniform(0.0, 2.0, 129).unwrap();
    let n = grid.len();
    let n_rep = 20_000;
    let circ = CirculantSampler::new(grid.clone(), h).unwrap();
    let cov = sample_cov_matrix(|s, out| circ.sample_into(s, out), n, n_rep, 21);
    let pts = grid.points();
    let idx = |t: f64| pts.iter().position(|&p| (p - t).abs() < 1e-12).unwrap();

    // Var(B_{2t}) = 2^{2H} Var(B_t) within combined tolerance
    let a = 2.0f64.powf(2.0 * h.value());
    for &t in &[0.25, 0.5, 1.0] {
        let (i, i2) = (idx(t), idx(2.0 * t));
        let (v, v2) = (cov[i * n + i], cov[i2 * n + i2]);
        let tol = 4.0 * (a * variance_se(v, n_rep) + variance_se(v2, n_rep));
        assert!((v2 - a * v).abs() <= tol, "t={t}: {v2} vs {}", a * v);
    }

    // Var(B_{t+l} - B_t) = l^{2H}, independent of t
    for &(t, l) in &[(0.0, 0.5), (0.5, 0.5), (1.0, 0.5), (0.25, 1.0), (1.0, 1.0)] {
        let (i, j) = (idx(t), idx(t + l));
        let v = cov[i * n + i] + cov[j * n + j] - 2.0 * cov[i * n + j];
        let want = l.powf(2.0 * h.value());
        // increment variance estimator has the same chi-square scaling
        let tol = 4.0 * variance_se(want, n_rep) + 4.0 * variance_se(v, n_rep);
        assert!((v - want).abs() <= tol, "t={t}, l={l}: {v} vs {want}");
    }
}

#[test]
fn normalized_field_variance_against_quadrature_oracle() {
    // Var X_1 at H = 1/2 is 2/3; the oracle integrates the defining
    // expectation E[(B_1 - int_0^1 B)^2]/H with the fBm covariance
    let h = hp(0.5);
    let oracle = {
        let cov = |t: f64, s: f64| fbm_covariance(t, s, h);
        let single = tanh_sinh(|u| cov(1.0, u), 0.0, 1.0, 1e-11);
        let inner = |v: f64| tanh_sinh_split(|u| cov(u, v), 0.0, 1.0, &[v], 1e-12);
        let double = tanh_sinh(inner, 0.0, 1.0, 1e-10);
        (cov(1.0, 1.0) - 2.0 * single + double) / h.value()
    };
    assert!((oracle - 2.0 / 3.0).abs() < 1e-8, "oracle {oracle}");

    let grid = TimeGrid::uniform(0.0, 1.0, 513).unwrap();
    let circ = CirculantSampler::new(grid.clone(), h).unwrap();
    let n_rep = 8_000;
    let endpoints: Vec<f64> = (0..n_rep)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |buf, r| {
                circ.sample_into(RngSeedSpec::new(31, r as u64), buf);
                let x = normalize_values(&grid, buf, h).unwrap();
                *x.last().unwrap()
            },
        )
        .collect();
    let v = variance(&endpoints);
    let tol = 4.0 * variance_se(2.0 / 3.0, n_rep);
    assert!(
        (v - 2.0 / 3.0).abs() <= tol,
        "Var X_1 = {v}, want 2/3 +- {tol}"
    );
}

#[test]
fn exact_field_sampler_agrees_with_trapezoid_route() {
    // two exact routes to the normalized field: direct kernel Cholesky vs
    // discretized fBm + trapezoid normalization
    let h = hp(0.15);
    let grid = TimeGrid::uniform(0.0, 1.0, 513).unwrap();
    let n_rep = 20_000;
    let probe: Vec<usize> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|t| {
            grid.points()
                .iter()
                .position(|&p| (p - t).abs() < 1e-12)
                .unwrap()
        })
        .collect();

    let exact = ExactFieldSampler::new(grid.clone(), h).unwrap();
    let circ = CirculantSampler::new(grid.clone(), h).unwrap();
    let direct: Vec<Vec<f64>> = (0..n_rep)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |buf, r| {
                exact.sample_into(RngSeedSpec::new(41, r as u64), buf);
                probe.iter().map(|&i| buf[i]).collect()
            },
        )
        .collect();
    let trapez: Vec<Vec<f64>> = (0..n_rep)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |buf, r| {
                circ.sample_into(RngSeedSpec::new(42, r as u64), buf);
                let x = normalize_values(&grid, buf, h).unwrap();
                probe.iter().map(|&i| x[i]).collect()
            },
        )
        .collect();

    for a in 0..probe.len() {
        for b in 0..=a {
            let xa: Vec<f64> = direct.iter().map(|v| v[a]).collect();
            let xb: Vec<f64> = direct.iter().map(|v| v[b]).collect();
            let ya: Vec<f64> = trapez.iter().map(|v| v[a]).collect();
            let yb: Vec<f64> = trapez.iter().map(|v| v[b]).collect();
            let (c1, c2) = (covariance(&xa, &xb), covariance(&ya, &yb));
            let se1 = covariance_se(variance(&xa), variance(&xb), c1, n_rep);
            let se2 = covariance_se(variance(&ya), variance(&yb), c2, n_rep);
            let tol = 4.0 * (se1 * se1 + se2 * se2).sqrt();
            assert!(
                (c1 - c2).abs() <= tol,
                "probe ({a},{b}): {c1} vs {c2} (tol {tol})"
            );
        }
    }
}

#[test]
fn fgn_lag_one_against_mc_oracle() {
    // brute-force Monte Carlo covariance of consecutive unit increments of
    // Cholesky-sampled paths, against the closed form at H = 0.3
    let h = hp(0.3);
    let grid = TimeGrid::explicit(vec![0.0, 1.0, 2.0]).unwrap();
    let chol = CholeskySampler::new(grid, h).unwrap();
    let n_rep = 200_000;
    let pairs: Vec<(f64, f64)> = (0..n_rep)
        .into_par_iter()
        .map_init(
            || vec![0.0; 3],
            |buf, r| {
                chol.sample_into(RngSeedSpec::new(57, r as u64), buf);
                (buf[1] - buf[0], buf[2] - buf[1])
            },
        )
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mc = covariance(&xs, &ys);
    let se = covariance_se(variance(&xs), variance(&ys), mc, n_rep);
    let want = fgn_autocovariance(1, h);
    assert!(
        (mc - want).abs() <= 4.0 * se,
        "MC {mc} vs closed form {want} (se {se})"
    );
}
