//! `selfcheck`: a fast deterministic invariant suite over the numerical
//! core. One report line per check; any failure exits with code 1.
//!
//! Setting FBMZERO_SELFCHECK_FAULT=kernel perturbs the kernel point-value
//! check by 1e-3. It exists as a negative control so the test suite can
//! verify that selfcheck actually detects a broken constant.

use fbmzero_core::fbm::{
    embedding_eigenvalues, fgn_autocovariance, normalize_values, sample_fbm_circulant,
    CirculantSampler,
};
use fbmzero_core::gmc::{frisch_parisi_dim, mc_total_mass, zeta_theory, GmcParams, GAMMA_MAX};
use fbmzero_core::kernel::{
    cone_kernel, dominating_bound, i24_centered, kernel_kh, kernel_kh_diag, kernel_limit,
    stable_pow_ratio, ConeKernelSpec, KernelUpperBound, UPPER_BOUND_H_SWEEP,
};
use fbmzero_core::pairing::TestFunction;
use fbmzero_core::quad::{AdaptiveQuad, GaussRule};
use fbmzero_core::{HurstParam, RngSeedSpec, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const PROBES: [(f64, f64); 9] = [
    (2.0, 1.0),
    (1.0, 0.3),
    (0.7, 0.45),
    (-0.3, -1.2),
    (-2.0, -0.5),
    (1.0, -1.0),
    (0.5, -1.5),
    (2.0, -0.4),
    (-0.8, 1.3),
];

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).expect("valid h")
}

fn fault_kernel_shift() -> f64 {
    match std::env::var("FBMZERO_SELFCHECK_FAULT") {
        Ok(v) if v == "kernel" => 1e-3,
        _ => 0.0,
    }
}

pub fn run(seed: u64) -> Result<(), CliError> {
    let mut failures: Vec<&'static str> = Vec::new();
    let mut check = |name: &'static str, result: Result<(), String>| match result {
        Ok(()) => println!("ok {name}"),
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            failures.push(name);
        }
    };

    check("stable_pow_ratio", pow_ratio_check());
    check("kernel_point_values", kernel_point_values());
    check("kernel_symmetries", kernel_symmetries());
    check("kernel_gap_monotone", kernel_gap_monotone());
    check("domination_bounds", domination_bounds(seed));
    check("kernel_upper_bound", kernel_upper_bound());
    check("cone_kernel", cone_values());
    check("autocovariance", autocovariance());
    check("hermite_functions", hermite_functions());
    check("adaptive_quadrature", adaptive_quadrature());
    check("zeta_and_frisch_parisi", zeta_and_frisch_parisi());
    check("sampler_determinism", sampler_determinism());
    check("circulant_embedding", circulant_embedding());
    check("normalization", normalization());
    check("gmc_mass", gmc_mass(seed));

    if failures.is_empty() {
        println!("selfcheck passed (15 checks)");
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "selfcheck failed: {}",
            failures.join(", ")
        )))
    }
}

fn assert_near(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} (tol {tol})"))
    }
}

fn pow_ratio_check() -> Result<(), String> {
    assert_near(
        "ratio(1, 0.3)",
        stable_pow_ratio(1.0, 0.3).map_err(|e| e.to_string())?,
        0.0,
        0.0,
    )?;
    let e = std::f64::consts::E;
    assert_near(
        "ratio(e, 0.5)",
        stable_pow_ratio(e, 0.5).map_err(|e| e.to_string())?,
        e - 1.0,
        1e-14,
    )?;
    assert_near(
        "ratio(2, 1e-8) -> ln 2",
        stable_pow_ratio(2.0, 1e-8).map_err(|e| e.to_string())?,
        std::f64::consts::LN_2,
        1e-6,
    )?;
    if stable_pow_ratio(-1.0, 0.1).is_ok() {
        return Err("negative x must be rejected".into());
    }
    Ok(())
}

fn kernel_point_values() -> Result<(), String> {
    let shift = fault_kernel_shift();
    let k = kernel_kh(2.0, 1.0, hp(0.5)).map_err(|e| e.to_string())?;
    assert_near("K_{1/2}(2,1)", k.total + shift, 1.0 / 3.0, 1e-12)?;
    let l = kernel_limit(2.0, 1.0).map_err(|e| e.to_string())?;
    assert_near(
        "K(2,1)",
        l.total + shift,
        std::f64::consts::LN_2 - 0.5,
        1e-12,
    )?;
    let l = kernel_limit(1.0, -1.0).map_err(|e| e.to_string())?;
    assert_near(
        "K(1,-1)",
        l.total + shift,
        std::f64::consts::LN_2 - 0.5,
        1e-12,
    )?;
    assert_near(
        "Var X_1 at H=1/2",
        kernel_kh_diag(1.0, hp(0.5)),
        2.0 / 3.0,
        1e-14,
    )?;
    Ok(())
}

fn kernel_symmetries() -> Result<(), String> {
    for &(t, s) in &PROBES {
        for &h in &[0.45, 0.1, 1e-3] {
            let a = kernel_kh(t, s, hp(h)).map_err(|e| e.to_string())?;
            let b = kernel_kh(s, t, hp(h)).map_err(|e| e.to_string())?;
            let c = kernel_kh(-t, -s, hp(h)).map_err(|e| e.to_string())?;
            if a.total.to_bits() != b.total.to_bits() || a.total.to_bits() != c.total.to_bits() {
                return Err(format!("symmetry broken at ({t}, {s}, {h})"));
            }
            if a.total.to_bits() != a.recombined_total().to_bits() {
                return Err(format!("total != i1+i2+i3+i4 at ({t}, {s}, {h})"));
            }
        }
    }
    Ok(())
}

fn kernel_gap_monotone() -> Result<(), String> {
    for &(t, s) in &PROBES {
        let limit = kernel_limit(t, s).map_err(|e| e.to_string())?.total;
        let mut prev = f64::INFINITY;
        for &h in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let gap = (kernel_kh(t, s, hp(h)).map_err(|e| e.to_string())?.total - limit).abs();
            if gap >= prev {
                return Err(format!("gap not decreasing at ({t}, {s}), h={h}"));
            }
            prev = gap;
        }
        if prev > 1e-2 {
            return Err(format!("gap at h=1e-4 too large at ({t}, {s}): {prev}"));
        }
    }
    Ok(())
}

fn domination_bounds(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0d0);
    let mut checked = 0;
    while checked < 1000 {
        let t = rng.random_range(-3.0..3.0_f64);
        let s = rng.random_range(-3.0..3.0_f64);
        let h = rng.random_range(1e-4..0.4999_f64);
        if t == 0.0 || s == 0.0 || t == s {
            continue;
        }
        let bound = dominating_bound(t, s, h).map_err(|e| e.to_string())?;
        let diff = i24_centered(t, s, h).map_err(|e| e.to_string())?.abs();
        if diff > bound.value * (1.0 + 1e-12) {
            return Err(format!(
                "violated at ({t}, {s}, {h}): {diff} > {}",
                bound.value
            ));
        }
        checked += 1;
    }
    Ok(())
}

fn kernel_upper_bound() -> Result<(), String> {
    let bound = KernelUpperBound::new(0.1).map_err(|e| e.to_string())?;
    for &h in UPPER_BOUND_H_SWEEP.iter() {
        for i in 0..20 {
            for j in 0..20 {
                let t = 0.1 + 0.9 * i as f64 / 19.0;
                let s = 0.1 + 0.9 * j as f64 / 19.0;
                let k = if t == s {
                    kernel_kh_diag(t, hp(h))
                } else {
                    kernel_kh(t, s, hp(h)).map_err(|e| e.to_string())?.total
                };
                let u = bound.eval(t, s, hp(h)).map_err(|e| e.to_string())?;
                if k > u {
                    return Err(format!("K({t},{s};{h}) = {k} above bound {u}"));
                }
            }
        }
    }
    Ok(())
}

fn cone_values() -> Result<(), String> {
    let spec = ConeKernelSpec::new(0.5).map_err(|e| e.to_string())?;
    assert_near(
        "cone(1, 0.5)",
        cone_kernel(1.0, spec).map_err(|e| e.to_string())?,
        0.0,
        1e-15,
    )?;
    let spec = ConeKernelSpec::new(0.1).map_err(|e| e.to_string())?;
    assert_near(
        "cone(0.05, 0.1)",
        cone_kernel(0.05, spec).map_err(|e| e.to_string())?,
        2.802585092994046,
        1e-12,
    )?;
    let plus = cone_kernel(0.3, spec).map_err(|e| e.to_string())?;
    let minus = cone_kernel(-0.3, spec).map_err(|e| e.to_string())?;
    if plus.to_bits() != minus.to_bits() {
        return Err("cone kernel not even".into());
    }
    Ok(())
}

fn autocovariance() -> Result<(), String> {
    assert_near("gamma(0)", fgn_autocovariance(0, hp(0.3)), 1.0, 0.0)?;
    assert_near(
        "gamma(1) at H=1/2",
        fgn_autocovariance(1, hp(0.5)),
        0.0,
        1e-15,
    )?;
    assert_near(
        "gamma(1) at H=0.3",
        fgn_autocovariance(1, hp(0.3)),
        0.5 * 2.0f64.powf(0.6) - 1.0,
        1e-15,
    )?;
    Ok(())
}

fn hermite_functions() -> Result<(), String> {
    let f0 = TestFunction::hermite(0, 0.0, 1.0).map_err(|e| e.to_string())?;
    assert_near("psi_0(0)", f0.eval(0.0), 0.7511255444649425, 1e-14)?;
    let rule = GaussRule::legendre(64);
    for n in 0..3u32 {
        let f = TestFunction::hermite(n, 0.0, 1.0).map_err(|e| e.to_string())?;
        let norm = rule.integrate(|x| f.eval(x) * f.eval(x), -9.0, 9.0);
        assert_near("hermite norm", norm, 1.0, 1e-8)?;
    }
    let mz = TestFunction::hermite_mean_zero(0, 0.4, 0.3).map_err(|e| e.to_string())?;
    let (lo, hi) = mz.effective_support();
    let mean = rule.integrate(|x| mz.eval(x), lo, hi);
    assert_near("mean-zero family integral", mean, 0.0, 1e-9)?;
    Ok(())
}

fn adaptive_quadrature() -> Result<(), String> {
    let quad = AdaptiveQuad::default();
    let r = quad
        .integrate(|x| x.max(1e-300).ln(), 0.0, 1.0, &[], 1e-10, 20_000)
        .map_err(|e| e.to_string())?;
    assert_near("int_0^1 ln x", r.value, -1.0, 1e-9)?;
    Ok(())
}

fn zeta_and_frisch_parisi() -> Result<(), String> {
    assert_near(
        "zeta(1)",
        zeta_theory(1.0, 0.9).map_err(|e| e.to_string())?,
        1.0,
        1e-15,
    )?;
    assert_near(
        "zeta(2, 0.5)",
        zeta_theory(2.0, 0.5).map_err(|e| e.to_string())?,
        1.75,
        1e-15,
    )?;
    for i in 0..5 {
        let gamma = 0.3 + i as f64 * 0.25;
        for j in 0..5 {
            let r = (GAMMA_MAX / gamma) * (0.1 + 0.18 * j as f64);
            let fp = frisch_parisi_dim(gamma, r).map_err(|e| e.to_string())?;
            if (fp.dim_numeric - fp.dim_closed_form).abs() > 1e-6 || (fp.argmin_p - r).abs() > 1e-6
            {
                return Err(format!("identity off at gamma={gamma}, r={r}"));
            }
        }
    }
    Ok(())
}

fn sampler_determinism() -> Result<(), String> {
    let grid = TimeGrid::uniform(0.0, 1.0, 33).map_err(|e| e.to_string())?;
    let a = sample_fbm_circulant(&grid, hp(0.2), 3, 7).map_err(|e| e.to_string())?;
    let b = sample_fbm_circulant(&grid, hp(0.2), 3, 7).map_err(|e| e.to_string())?;
    if a != b {
        return Err("circulant resample differs".into());
    }
    // replica streams are independent of generation order
    let sampler = CirculantSampler::new(grid, hp(0.2)).map_err(|e| e.to_string())?;
    let one = sampler.sample(RngSeedSpec::new(7, 2));
    if one.as_slice() != a.path(2) {
        return Err("replica stream depends on batch context".into());
    }
    Ok(())
}

fn circulant_embedding() -> Result<(), String> {
    for &m in &[8usize, 100, 255] {
        for &h in &[0.1, 0.5, 0.8] {
            let lambda = embedding_eigenvalues(m, hp(h)).map_err(|e| e.to_string())?;
            if lambda.iter().any(|&l| l < 0.0) {
                return Err(format!("negative eigenvalue at m={m}, h={h}"));
            }
        }
    }
    Ok(())
}

fn normalization() -> Result<(), String> {
    let grid = TimeGrid::uniform_indexed(0.25, -2, 6).map_err(|e| e.to_string())?;
    let zeros = vec![0.0; grid.len()];
    let x = normalize_values(&grid, &zeros, hp(0.4)).map_err(|e| e.to_string())?;
    if x.iter().any(|&v| v != 0.0) {
        return Err("zero path must normalize to zero".into());
    }
    Ok(())
}

fn gmc_mass(seed: u64) -> Result<(), String> {
    let params = GmcParams::new(0.5, 0.1, hp(0.05), 64).map_err(|e| e.to_string())?;
    let (mean, se) = mc_total_mass(&params, 300, seed ^ 0x6a6a).map_err(|e| e.to_string())?;
    if (mean - 0.9).abs() > 6.0 * se {
        return Err(format!("mean mass {mean} off 0.9 by more than 6 se ({se})"));
    }
    Ok(())
}
