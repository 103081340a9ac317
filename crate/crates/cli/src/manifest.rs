//! Run manifests: everything needed to reproduce a command's outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Effective value of every configuration key.
    pub config: BTreeMap<String, String>,
    /// Seeds of every random stream, by role.
    pub seeds: BTreeMap<String, u64>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub stability_rejections: Vec<usize>,
    /// RWM acceptance rates, one list per chain.
    pub acceptance_rates: Vec<Vec<f64>>,
    /// Numeric self-checks (for example grid integrals).
    pub checks: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, workers: usize) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.echo(),
            seeds: BTreeMap::new(),
            workers,
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
            stability_rejections: Vec::new(),
            acceptance_rates: Vec::new(),
            checks: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::data::write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The configuration that produced this manifest.
    pub fn config(&self) -> Result<RunConfig> {
        RunConfig::from_echo(&self.config)
    }
}
