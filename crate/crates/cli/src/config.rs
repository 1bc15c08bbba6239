use std::path::Path;

use hyperpark::{Depth, ModulationLaw, Strategy};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20261015;
pub const SEED_ENV: &str = "HYPERPARK_SEED";

/// Either an integer depth or the string `inf`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum DepthValue {
    Int(u32),
    Text(String),
}

/// Values read from `--config`; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub lambda: Option<f64>,
    k_max: Option<DepthValue>,
    pub seed: Option<u64>,
    strategy: Option<String>,
    modulation: Option<String>,
    beta: Option<f64>,
    theta: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn k_max(&self) -> Result<Option<Depth>, CliError> {
        match &self.k_max {
            None => Ok(None),
            Some(DepthValue::Int(k)) => Ok(Some(Depth::Finite(*k))),
            Some(DepthValue::Text(t)) => t.parse().map(Some).map_err(CliError::from),
        }
    }

    pub fn strategy(&self) -> Result<Option<Strategy>, CliError> {
        self.strategy.as_deref().map(str::parse).transpose().map_err(CliError::from)
    }

    /// `modulation` is a full law (`gamma:0.5:2`), `none`, or `gamma` with shape `beta`
    /// and scale `theta`.
    pub fn modulation(&self) -> Result<Option<Option<ModulationLaw>>, CliError> {
        let Some(m) = self.modulation.as_deref() else {
            return Ok(None);
        };
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Usage(format!("modulation `{m}` needs `{key}` in the config file")))
        };
        let law = match m.trim() {
            "none" => None,
            "gamma" => Some(ModulationLaw::gamma(need(self.beta, "beta")?, need(self.theta, "theta")?)?),
            full => Some(full.parse()?),
        };
        Ok(Some(law))
    }
}

/// Flag, then config file, then `$HYPERPARK_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|e| CliError::Usage(format!("{SEED_ENV}=`{v}`: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
