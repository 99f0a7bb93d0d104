//! JSON scenario files for `ace simulate`.

use std::fs;
use std::path::{Path, PathBuf};

use ace_core::estimators::AceConfig;
use ace_core::simulate::{DgpConfig, EstimatorSpec, McConfig, NuisancePolicy, NuisanceSampling};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dgp: DgpConfig,
    pub estimators: Vec<EstimatorSpec>,
    pub reps: usize,
    #[serde(default)]
    pub nuisance: NuisancePolicy,
    #[serde(default)]
    pub sampling: NuisanceSampling,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub ace: AceConfig,
    /// Output directory, used when `--out` is not given.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_mc_config(&self) -> McConfig {
        McConfig {
            dgp: self.dgp.clone(),
            estimators: self.estimators.clone(),
            reps: self.reps,
            nuisance: self.nuisance,
            sampling: self.sampling,
            base_seed: self.base_seed,
            level: self.level,
            ace: self.ace,
        }
    }
}
