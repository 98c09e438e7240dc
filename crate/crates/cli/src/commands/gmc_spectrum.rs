//! `gmc-spectrum`: moment-scaling exponents of the chaos measure with the
//! theory column, one sampled measure for inspection, and the Frisch-Parisi
//! identity subtable.

use std::time::SystemTime;

use fbmzero_core::gmc::{
    estimate_spectrum_with_centers, frisch_parisi_dim, BallCenters, GmcParams, GmcSampler,
    GAMMA_MAX,
};
use fbmzero_core::{HurstParam, RngSeedSpec};
use serde_json::json;

use crate::config::{CentersSpec, GmcSpectrumConfig};
use crate::io::{Csv, CsvField, ManifestDraft, OutputStage};
use crate::{CliError, RunArgs, RunContext};

pub fn run(ctx: &RunContext, args: &RunArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let mut cfg: GmcSpectrumConfig = ctx.load_config(&args.config)?;
    if let Some(seed) = ctx.seed_override {
        cfg.seed = seed;
    }
    let h = HurstParam::new(cfg.h).map_err(CliError::config)?;
    let params = GmcParams::new(cfg.gamma, cfg.delta, h, cfg.cells).map_err(CliError::config)?;
    let radii = match &cfg.radii {
        Some(r) => r.clone(),
        None => GmcSpectrumConfig::dyadic_radii(cfg.delta, cfg.cells),
    };
    if radii.len() < 3 {
        return Err(CliError::Config(format!(
            "need at least 3 radii in the resolved interior window, got {radii:?}"
        )));
    }
    let centers = match cfg.centers {
        CentersSpec::Midpoint => BallCenters::Midpoint,
        CentersSpec::FiveInterior => BallCenters::FiveInterior,
    };

    let est = estimate_spectrum_with_centers(
        &params,
        &cfg.q_values,
        &radii,
        cfg.replicas,
        cfg.seed,
        centers,
    )
    .map_err(|e| match e {
        e @ fbmzero_core::Error::Domain { .. } => CliError::config(e),
        e => CliError::runtime(e),
    })?;

    let mut csv = Csv::new("q,zeta_hat,zeta_se,zeta_theory,r2");
    for i in 0..est.q_values.len() {
        csv.row(&[
            CsvField::Float(est.q_values[i]),
            CsvField::Float(est.zeta_hat[i]),
            CsvField::Float(est.zeta_se[i]),
            CsvField::Float(est.zeta_theory[i]),
            CsvField::Float(est.regression_r2[i]),
        ]);
    }

    // one measure realization for inspection
    let sampler = GmcSampler::new(params.clone()).map_err(CliError::runtime)?;
    let measure = sampler.sample(RngSeedSpec::new(cfg.seed, 0));
    let mut measure_csv = Csv::new("t_cell,weight");
    for (t, w) in params.grid().points().iter().zip(measure.weights().iter()) {
        measure_csv.row(&[CsvField::Float(*t), CsvField::Float(*w)]);
    }

    let mut stage = OutputStage::new(&ctx.out_dir).map_err(CliError::runtime)?;
    stage
        .add("spectrum.csv", &csv.into_bytes())
        .map_err(CliError::runtime)?;
    stage
        .add("measure.csv", &measure_csv.into_bytes())
        .map_err(CliError::runtime)?;

    if cfg.frisch_parisi {
        let mut fp_csv = Csv::new("gamma,r,dim_numeric,dim_closed_form,argmin_p,deviation");
        let mut max_dev = 0.0_f64;
        for i in 0..10 {
            let gamma = 0.2 + (1.35 - 0.2) * i as f64 / 9.0;
            for j in 0..10 {
                let r = (GAMMA_MAX / gamma) * (0.08 + 0.84 * j as f64 / 9.0);
                let fp = frisch_parisi_dim(gamma, r).map_err(CliError::runtime)?;
                let dev = (fp.dim_numeric - fp.dim_closed_form).abs();
                max_dev = max_dev.max(dev);
                fp_csv.row(&[
                    CsvField::Float(gamma),
                    CsvField::Float(r),
                    CsvField::Float(fp.dim_numeric),
                    CsvField::Float(fp.dim_closed_form),
                    CsvField::Float(fp.argmin_p),
                    CsvField::Float(dev),
                ]);
            }
        }
        if max_dev > 1e-6 {
            return Err(CliError::Runtime(format!(
                "Frisch-Parisi identity deviation {max_dev} exceeds 1e-6"
            )));
        }
        stage
            .add("frisch_parisi.csv", &fp_csv.into_bytes())
            .map_err(CliError::runtime)?;
    }

    let mut doc = serde_json::to_vec_pretty(&json!({
        "q_values": est.q_values,
        "zeta_hat": est.zeta_hat,
        "zeta_se": est.zeta_se,
        "zeta_theory": est.zeta_theory,
        "regression_r2": est.regression_r2,
        "r_range": est.r_range,
        "n_replicas": est.n_replicas,
        "gamma": cfg.gamma,
        "delta": cfg.delta,
        "h": cfg.h,
        "cells": cfg.cells,
    }))
    .map_err(CliError::runtime)?;
    doc.push(b'\n');
    stage
        .add("spectrum.json", &doc)
        .map_err(CliError::runtime)?;

    stage
        .commit(ManifestDraft {
            command: "gmc-spectrum".into(),
            seed: cfg.seed,
            threads: ctx.threads,
            started_at: started,
            config: serde_json::to_value(&cfg).map_err(CliError::runtime)?,
        })
        .map_err(CliError::runtime)?;
    Ok(())
}
