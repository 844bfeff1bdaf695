//! Run manifests: everything needed to repeat a run.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub workers: usize,
    /// The fully resolved configuration, in the input file format.
    pub config: String,
    pub runtime_seconds: f64,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &Config, workers: usize, runtime: Duration, warnings: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            master_seed: cfg.experiment.seed,
            workers,
            config: cfg.to_toml(),
            runtime_seconds: runtime.as_secs_f64(),
            warnings,
        }
    }

    /// The configuration the run used.
    pub fn config(&self) -> Result<Config, CliError> {
        Config::from_toml(&self.config)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))
    }
}
