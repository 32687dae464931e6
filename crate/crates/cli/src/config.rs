//! Config file layout. Every key is optional; command-line flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub target: TargetSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub integrate: IntegrateSection,
    #[serde(default)]
    pub vegas: VegasSection,
    #[serde(default)]
    pub tile_check: TileCheckSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dims: Option<usize>,
    pub qubits: Option<Vec<u32>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub integrand: Option<String>,
    pub kinematics: Option<PathBuf>,
    pub form: Option<String>,
    pub value: Option<f64>,
    pub samples_per_cell: Option<usize>,
    pub use_abs: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub layers: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub optimizer: Option<String>,
    pub max_iterations: Option<usize>,
    pub initial_step: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSection {
    pub params: Option<PathBuf>,
    pub oracle: Option<bool>,
    pub shots: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VegasSection {
    pub bins: Option<usize>,
    pub samples: Option<f64>,
    pub iterations: Option<usize>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileCheckSection {
    pub trials: Option<usize>,
    pub min_dims: Option<usize>,
    pub max_dims: Option<usize>,
    pub max_qubits: Option<u32>,
    pub max_measured: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // Relative file references are resolved against the config's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.target.kinematics, &mut cfg.integrate.params].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Parses a count such as `1000`, `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> Result<u64> {
    let v: f64 = s.trim().parse().with_context(|| format!("'{s}' is not a number"))?;
    count_from_f64(v)
}

pub fn count_from_f64(v: f64) -> Result<u64> {
    if !(v >= 1.0) || v.fract() != 0.0 || v > 2f64.powi(53) {
        bail!("counts must be positive integers, got {v}");
    }
    Ok(v as u64)
}

/// A strictly increasing, non-empty list of shot counts.
pub fn check_schedule(shots: &[u64]) -> Result<()> {
    if shots.is_empty() {
        bail!("the shot schedule is empty");
    }
    if shots.windows(2).any(|w| w[1] <= w[0]) {
        bail!("the shot schedule must be strictly increasing, got {shots:?}");
    }
    if shots[0] < 2 {
        bail!("every shot count must be at least 2");
    }
    Ok(())
}
