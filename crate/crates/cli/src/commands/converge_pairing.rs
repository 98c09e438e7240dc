//! `converge-pairing`: the kernel double integral against two test
//! functions along an h sweep, with the gap to the limit kernel and an
//! optional Monte Carlo cross-check of the pairing covariance.

use std::time::SystemTime;

use fbmzero_core::fbm::{normalize_values, CirculantSampler};
use fbmzero_core::pairing::{
    double_integral_kernel, pair_samples, KernelChoice, QuadratureSpec, TestFunction,
};
use fbmzero_core::{HurstParam, RngSeedSpec, TimeGrid};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ConvergePairingConfig;
use crate::io::{Csv, CsvField, ManifestDraft, OutputStage};
use crate::{CliError, RunArgs, RunContext};

pub fn run(ctx: &RunContext, args: &RunArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let mut cfg: ConvergePairingConfig = ctx.load_config(&args.config)?;
    if let Some(seed) = ctx.seed_override {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let f1 = cfg.f1.build()?;
    let f2 = cfg.f2.build()?;
    let spec = QuadratureSpec::new(cfg.abs_tol, cfg.max_subdivisions).map_err(CliError::config)?;

    let limit = double_integral_kernel(KernelChoice::Limit, &f1, &f2, &spec)
        .map_err(CliError::runtime)?
        .value;

    let mc_grid = if cfg.replicas > 0 {
        Some(covering_grid(&f1, &f2, cfg.grid_increments)?)
    } else {
        None
    };

    let with_mc = cfg.replicas > 0;
    let header = if with_mc {
        "h,value,limit_value,gap,mc_covariance,mc_se"
    } else {
        "h,value,limit_value,gap"
    };
    let mut csv = Csv::new(header);
    let mut rows_json = Vec::new();
    for &hv in &cfg.h_values {
        let h = HurstParam::new(hv).map_err(CliError::config)?;
        let value = double_integral_kernel(KernelChoice::Kh(h), &f1, &f2, &spec)
            .map_err(CliError::runtime)?
            .value;
        let gap = (value - limit).abs();
        if let Some(grid) = &mc_grid {
            let (mc, se) = ctx
                .pool
                .install(|| mc_covariance(grid, h, &f1, &f2, cfg.replicas, cfg.seed))?;
            csv.row(&[
                CsvField::Float(hv),
                CsvField::Float(value),
                CsvField::Float(limit),
                CsvField::Float(gap),
                CsvField::Float(mc),
                CsvField::Float(se),
            ]);
            rows_json.push(json!({
                "h": hv, "value": value, "limit_value": limit, "gap": gap,
                "mc_covariance": mc, "mc_se": se,
            }));
        } else {
            csv.row(&[
                CsvField::Float(hv),
                CsvField::Float(value),
                CsvField::Float(limit),
                CsvField::Float(gap),
            ]);
            rows_json.push(json!({ "h": hv, "value": value, "limit_value": limit, "gap": gap }));
        }
    }

    let mut stage = OutputStage::new(&ctx.out_dir).map_err(CliError::runtime)?;
    stage
        .add("pairing.csv", &csv.into_bytes())
        .map_err(CliError::runtime)?;
    let mut doc = serde_json::to_vec_pretty(&json!({
        "limit_value": limit,
        "rows": rows_json,
    }))
    .map_err(CliError::runtime)?;
    doc.push(b'\n');
    stage.add("pairing.json", &doc).map_err(CliError::runtime)?;
    stage
        .commit(ManifestDraft {
            command: "converge-pairing".into(),
            seed: cfg.seed,
            threads: ctx.threads,
            started_at: started,
            config: serde_json::to_value(&cfg).map_err(CliError::runtime)?,
        })
        .map_err(CliError::runtime)?;
    Ok(())
}

/// Uniform grid through t = 0 covering both effective supports, with a
/// power-of-two-friendly increment count.
fn covering_grid(
    f1: &TestFunction,
    f2: &TestFunction,
    increments: u32,
) -> Result<TimeGrid, CliError> {
    let (lo1, hi1) = f1.effective_support();
    let (lo2, hi2) = f2.effective_support();
    let lo = lo1.min(lo2);
    let hi = hi1.max(hi2);
    let step = 1.02 * (hi - lo) / increments as f64;
    let k_min = (lo / step).floor() as i64 - 1;
    TimeGrid::uniform_indexed(step, k_min, k_min + increments as i64).map_err(CliError::config)
}

/// Replica-parallel Monte Carlo covariance of the two pairings; the
/// per-replica values are indexed by replica, so the result is independent
/// of the worker count.
fn mc_covariance(
    grid: &TimeGrid,
    h: HurstParam,
    f1: &TestFunction,
    f2: &TestFunction,
    n_replicas: usize,
    seed: u64,
) -> Result<(f64, f64), CliError> {
    let sampler = CirculantSampler::new(grid.clone(), h).map_err(CliError::runtime)?;
    let pairs: Vec<(f64, f64)> = (0..n_replicas)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |buf, r| -> Result<(f64, f64), fbmzero_core::Error> {
                sampler.sample_into(RngSeedSpec::new(seed, r as u64), buf);
                let x = normalize_values(grid, buf, h)?;
                Ok((pair_samples(grid, &x, f1)?, pair_samples(grid, &x, f2)?))
            },
        )
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?;
    let n = n_replicas as f64;
    let m1 = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let m2 = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut c, mut v1, mut v2) = (0.0, 0.0, 0.0);
    for (p1, p2) in &pairs {
        let (d1, d2) = (p1 - m1, p2 - m2);
        c += d1 * d2;
        v1 += d1 * d1;
        v2 += d2 * d2;
    }
    c /= n - 1.0;
    v1 /= n - 1.0;
    v2 /= n - 1.0;
    Ok((c, ((v1 * v2 + c * c) / (n - 1.0)).sqrt()))
}
