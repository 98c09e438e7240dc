//! `sample`: path ensembles to columnar CSV, little-endian binary and a JSON
//! sidecar.

use std::time::SystemTime;

use fbmzero_core::fbm::{
    normalize_to_x, CholeskySampler, CirculantSampler, PathEnsemble, PathLabel, SamplerKind,
    CHOLESKY_MAX_POINTS,
};
use fbmzero_core::grid::GridKind;
use fbmzero_core::{HurstParam, RngSeedSpec, TimeGrid};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{SampleConfig, SampleMethod};
use crate::io::{Csv, CsvField, ManifestDraft, OutputStage};
use crate::{CliError, RunArgs, RunContext};

pub fn run(ctx: &RunContext, args: &RunArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let mut cfg: SampleConfig = ctx.load_config(&args.config)?;
    if let Some(seed) = ctx.seed_override {
        cfg.seed = seed;
    }
    let (h, grid) = cfg.validate()?;

    let ensemble = ctx.pool.install(|| build_ensemble(&cfg, h, &grid))?;

    let mut stage = OutputStage::new(&ctx.out_dir).map_err(CliError::runtime)?;
    stage
        .add("ensemble.csv", &ensemble_csv(&ensemble))
        .map_err(CliError::runtime)?;
    stage
        .add("ensemble.bin", &ensemble_bin(&ensemble))
        .map_err(CliError::runtime)?;
    stage
        .add("ensemble.json", &sidecar_json(&ensemble))
        .map_err(CliError::runtime)?;
    if cfg.normalize {
        let x = normalize_to_x(&ensemble).map_err(CliError::runtime)?;
        stage
            .add("ensemble_x.csv", &ensemble_csv(&x))
            .map_err(CliError::runtime)?;
        stage
            .add("ensemble_x.bin", &ensemble_bin(&x))
            .map_err(CliError::runtime)?;
        stage
            .add("ensemble_x.json", &sidecar_json(&x))
            .map_err(CliError::runtime)?;
    }
    stage
        .commit(ManifestDraft {
            command: "sample".into(),
            seed: cfg.seed,
            threads: ctx.threads,
            started_at: started,
            config: serde_json::to_value(&cfg).map_err(CliError::runtime)?,
        })
        .map_err(CliError::runtime)?;
    Ok(())
}

fn build_ensemble(
    cfg: &SampleConfig,
    h: HurstParam,
    grid: &TimeGrid,
) -> Result<PathEnsemble, CliError> {
    let circulant_ok = grid.kind() == GridKind::Uniform && grid.zero_index().is_some();
    let method = match cfg.method {
        SampleMethod::Auto => {
            if circulant_ok {
                SampleMethod::Circulant
            } else {
                SampleMethod::Cholesky
            }
        }
        m => m,
    };
    match method {
        SampleMethod::Circulant => {
            // parallel replica generation; each replica owns its stream
            match CirculantSampler::new(grid.clone(), h) {
                Ok(sampler) => Ok(parallel_ensemble(
                    grid,
                    h,
                    cfg,
                    SamplerKind::Circulant,
                    |s, out| sampler.sample_into(s, out),
                )),
                Err(fbmzero_core::Error::NegativeEigenvalue {
                    min_eigenvalue,
                    tolerance,
                }) => {
                    eprintln!(
                        "warning: circulant embedding rejected (eigenvalue {min_eigenvalue} below -{tolerance}); falling back to Cholesky"
                    );
                    let sampler =
                        CholeskySampler::new(grid.clone(), h).map_err(classify_sampler_error)?;
                    Ok(parallel_ensemble(
                        grid,
                        h,
                        cfg,
                        SamplerKind::CirculantFellBackToCholesky,
                        |s, out| sampler.sample_into(s, out),
                    ))
                }
                Err(e) => Err(classify_sampler_error(e)),
            }
        }
        SampleMethod::Cholesky => {
            let sampler = CholeskySampler::new(grid.clone(), h).map_err(classify_sampler_error)?;
            Ok(parallel_ensemble(
                grid,
                h,
                cfg,
                SamplerKind::Cholesky,
                |s, out| sampler.sample_into(s, out),
            ))
        }
        SampleMethod::Auto => unreachable!("auto resolved above"),
    }
}

fn classify_sampler_error(e: fbmzero_core::Error) -> CliError {
    use fbmzero_core::Error::*;
    match e {
        InvalidGrid { .. } | InvalidHurst { .. } | Domain { .. } | GridMissingZero => {
            CliError::config(e)
        }
        other => CliError::runtime(other),
    }
}

fn parallel_ensemble(
    grid: &TimeGrid,
    h: HurstParam,
    cfg: &SampleConfig,
    kind: SamplerKind,
    sample: impl Fn(RngSeedSpec, &mut [f64]) + Sync,
) -> PathEnsemble {
    let n = grid.len();
    let mut values = vec![0.0; cfg.replicas * n];
    values.par_chunks_mut(n).enumerate().for_each(|(r, chunk)| {
        sample(RngSeedSpec::new(cfg.seed, r as u64), chunk);
    });
    PathEnsemble::from_parts(
        grid.clone(),
        h,
        cfg.seed,
        PathLabel::Fbm,
        kind,
        cfg.replicas,
        values,
    )
    .expect("sizes are consistent by construction")
}

fn ensemble_csv(e: &PathEnsemble) -> Vec<u8> {
    let mut csv = Csv::new("replica,t,value");
    let pts = e.grid().points();
    for r in 0..e.n_replicas() {
        let path = e.path(r);
        for (t, v) in pts.iter().zip(path.iter()) {
            csv.row(&[
                CsvField::Int(r as i64),
                CsvField::Float(*t),
                CsvField::Float(*v),
            ]);
        }
    }
    csv.into_bytes()
}

/// Row-major replica x grid, little-endian f64.
fn ensemble_bin(e: &PathEnsemble) -> Vec<u8> {
    let n = e.grid().len();
    let mut buf = Vec::with_capacity(e.n_replicas() * n * 8);
    for r in 0..e.n_replicas() {
        for v in e.path(r) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

fn sidecar_json(e: &PathEnsemble) -> Vec<u8> {
    let label = match e.label() {
        PathLabel::Fbm => "fbm",
        PathLabel::NormalizedX => "normalized_x",
    };
    let sampler = match e.sampler() {
        SamplerKind::Cholesky => "cholesky",
        SamplerKind::Circulant => "circulant",
        SamplerKind::CirculantFellBackToCholesky => "circulant_fell_back_to_cholesky",
    };
    let kind = match e.grid().kind() {
        GridKind::Uniform => "uniform",
        GridKind::Explicit => "explicit",
    };
    let doc = json!({
        "label": label,
        "h": e.hurst().value(),
        "seed": e.master_seed(),
        "replicas": e.n_replicas(),
        "sampler": sampler,
        "grid": {
            "kind": kind,
            "step": e.grid().step(),
            "points": e.grid().points(),
        },
        "layout": "row-major replica x grid, little-endian f64",
        "cholesky_guard_points": CHOLESKY_MAX_POINTS,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("sidecar serializes");
    bytes.push(b'\n');
    bytes
}
