//! Resolved run configurations: defaults, then an optional JSON file, then
//! command-line flags.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Error in the run configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Maps library errors raised while validating a configuration to exit code 2.
pub fn check<T>(r: graphon_paths::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| config_error(e.to_string()))
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let file = File::open(path).map_err(|e| config_error(format!("cannot open config {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))
}

/// Copies every flag that was given over the corresponding config field.
macro_rules! overlay {
    ($cfg:expr, $args:expr, $($field:ident),* $(,)?) => {
        $(
            if let Some(v) = $args.$field.clone() {
                $cfg.$field = v.into();
            }
        )*
    };
}
pub(crate) use overlay;

pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> anyhow::Result<T> {
    value.clone().ok_or_else(|| config_error(format!("missing required option --{flag}")))
}

pub fn read_file(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub variant: Option<graphon_paths::dynamics::Variant>,
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambda_tri: Option<f64>,
    pub mu_age: Option<f64>,
    pub cmax: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub series_steps: Option<usize>,
    pub path_steps: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidRunConfig {
    pub m: Option<usize>,
    pub dt: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambda_tri: Option<f64>,
    pub mu_age: Option<f64>,
    pub cmax: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub triangle_stride: Option<usize>,
    pub driving_path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub path: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(rename = "Q")]
    pub q: Option<String>,
    pub estar: Option<f64>,
    pub estar_grid: Option<String>,
    pub direction: Option<String>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutdistConfig {
    pub a: Option<String>,
    pub b: Option<String>,
    pub restarts: Option<usize>,
    pub max_blocks: Option<usize>,
    pub seed: Option<u64>,
}
