//! Per-command configuration records: one JSON document per run, with
//! scalar fields overridable from the command line.

use fbmzero_core::pairing::{TestFunction, TestFunctionFamily};
use fbmzero_core::{HurstParam, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_seed() -> u64 {
    0
}

/// Grid specification: either an inclusive [start, stop] range with a point
/// count, or indexed multiples of a step (which pins an exact t = 0 when
/// k_min <= 0 <= k_max), or explicit points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
    Indexed {
        step: f64,
        k_min: i64,
        k_max: i64,
    },
    Explicit {
        times: Vec<f64>,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid, CliError> {
        let grid = match self {
            GridSpec::Range {
                start,
                stop,
                points,
            } => TimeGrid::uniform(*start, *stop, *points),
            GridSpec::Indexed { step, k_min, k_max } => {
                TimeGrid::uniform_indexed(*step, *k_min, *k_max)
            }
            GridSpec::Explicit { times } => TimeGrid::explicit(times.clone()),
        };
        grid.map_err(CliError::config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    Auto,
    Cholesky,
    Circulant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub h: f64,
    pub grid: GridSpec,
    pub replicas: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "SampleConfig::default_method")]
    pub method: SampleMethod,
    /// Also derive the normalized field from the sampled paths.
    #[serde(default)]
    pub normalize: bool,
}

impl SampleConfig {
    fn default_method() -> SampleMethod {
        SampleMethod::Auto
    }

    /// Cap on replicas x points so a typo cannot ask for a terabyte
    /// ensemble (2^27 values is 1 GiB of f64).
    pub const MAX_VALUES: usize = 1 << 27;

    pub fn validate(&self) -> Result<(HurstParam, TimeGrid), CliError> {
        let h = HurstParam::new(self.h).map_err(CliError::config)?;
        let grid = self.grid.build()?;
        if self.replicas == 0 {
            return Err(CliError::Config("replicas must be at least 1".into()));
        }
        match self.replicas.checked_mul(grid.len()) {
            Some(total) if total <= Self::MAX_VALUES => {}
            _ => {
                return Err(CliError::Config(format!(
                    "{} replicas x {} points exceeds the {}-value ensemble cap",
                    self.replicas,
                    grid.len(),
                    Self::MAX_VALUES
                )))
            }
        }
        if self.normalize && grid.zero_index().is_none() {
            return Err(CliError::Config(
                "normalize requires a grid containing t = 0".into(),
            ));
        }
        Ok((h, grid))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTableConfig {
    /// Probe points (t, s); defaults to nine points spanning all sign cases.
    #[serde(default = "KernelTableConfig::default_probes")]
    pub probes: Vec<(f64, f64)>,
    #[serde(default = "KernelTableConfig::default_h_values")]
    pub h_values: Vec<f64>,
}

impl KernelTableConfig {
    pub fn default_probes() -> Vec<(f64, f64)> {
        vec![
            (2.0, 1.0),
            (1.0, 0.3),
            (0.7, 0.45),
            (-0.3, -1.2),
            (-2.0, -0.5),
            (1.0, -1.0),
            (0.5, -1.5),
            (2.0, -0.4),
            (-0.8, 1.3),
        ]
    }

    pub fn default_h_values() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3, 1e-4]
    }

    pub fn validate(&self) -> Result<Vec<HurstParam>, CliError> {
        for &(t, s) in &self.probes {
            if t == 0.0 || s == 0.0 || t == s {
                return Err(CliError::Config(format!(
                    "singular probe point (t={t}, s={s}): t = 0, s = 0 and t = s are excluded"
                )));
            }
        }
        if self.h_values.is_empty() {
            return Err(CliError::Config("h_values must be nonempty".into()));
        }
        for w in self.h_values.windows(2) {
            if w[1] >= w[0] {
                return Err(CliError::Config(
                    "h_values must be strictly decreasing".into(),
                ));
            }
        }
        self.h_values
            .iter()
            .map(|&h| HurstParam::new(h).map_err(CliError::config))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    pub family: FamilySpec,
    pub index: u32,
    pub center: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Hermite,
    HermiteMeanZero,
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<TestFunction, CliError> {
        let family = match self.family {
            FamilySpec::Hermite => TestFunctionFamily::Hermite,
            FamilySpec::HermiteMeanZero => TestFunctionFamily::HermiteMeanZero,
        };
        TestFunction::new(family, self.index, self.center, self.scale).map_err(CliError::config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergePairingConfig {
    pub f1: TestFunctionSpec,
    pub f2: TestFunctionSpec,
    #[serde(default = "KernelTableConfig::default_h_values")]
    pub h_values: Vec<f64>,
    #[serde(default = "ConvergePairingConfig::default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "ConvergePairingConfig::default_max_subdivisions")]
    pub max_subdivisions: usize,
    /// Monte Carlo cross-check replica count; 0 disables the MC columns.
    #[serde(default)]
    pub replicas: usize,
    /// Increment count of the sampling grid for the MC cross-check.
    #[serde(default = "ConvergePairingConfig::default_grid_increments")]
    pub grid_increments: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl ConvergePairingConfig {
    fn default_abs_tol() -> f64 {
        1e-4
    }
    fn default_max_subdivisions() -> usize {
        400_000
    }
    fn default_grid_increments() -> u32 {
        2048
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.abs_tol > 0.0) {
            return Err(CliError::Config("abs_tol must be positive".into()));
        }
        if self.h_values.is_empty() {
            return Err(CliError::Config("h_values must be nonempty".into()));
        }
        for w in self.h_values.windows(2) {
            if w[1] >= w[0] {
                return Err(CliError::Config(
                    "h_values must be strictly decreasing".into(),
                ));
            }
        }
        for &h in &self.h_values {
            HurstParam::new(h).map_err(CliError::config)?;
        }
        if self.replicas > 0 && self.grid_increments < 16 {
            return Err(CliError::Config(
                "grid_increments must be at least 16".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentersSpec {
    #[default]
    Midpoint,
    FiveInterior,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmcSpectrumConfig {
    pub gamma: f64,
    #[serde(default = "GmcSpectrumConfig::default_delta")]
    pub delta: f64,
    pub h: f64,
    #[serde(default = "GmcSpectrumConfig::default_cells")]
    pub cells: usize,
    pub q_values: Vec<f64>,
    /// Ball radii for the scaling regression; omitted means dyadic radii
    /// spanning the resolved interior range.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    pub replicas: usize,
    #[serde(default)]
    pub centers: CentersSpec,
    /// Also emit the Frisch-Parisi identity subtable.
    #[serde(default = "GmcSpectrumConfig::default_frisch_parisi")]
    pub frisch_parisi: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl GmcSpectrumConfig {
    fn default_delta() -> f64 {
        0.1
    }
    fn default_cells() -> usize {
        512
    }
    fn default_frisch_parisi() -> bool {
        true
    }

    /// Dyadic radii 2^{-k} inside the resolved interior window.
    pub fn dyadic_radii(delta: f64, cells: usize) -> Vec<f64> {
        let dt = (1.0 - delta) / cells as f64;
        let mut radii = Vec::new();
        for k in 1..40 {
            let r = 2.0f64.powi(-k);
            if r >= 0.25 * (1.0 - delta) {
                continue;
            }
            if r <= 4.0 * dt {
                break;
            }
            radii.push(r);
        }
        radii
    }
}
