//! Run manifests: configuration echo, outputs, assertions, errors.

use serde::Serialize;
use std::path::Path;

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: &'static str,
    pub wall_time_secs: f64,
    pub outputs: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            code_version: env!("CARGO_PKG_VERSION"),
            wall_time_secs: 0.0,
            outputs: Vec::new(),
            assertions: Vec::new(),
            error: None,
        }
    }

    pub fn assert_check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// The manifest is written even when the run failed.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json)
    }
}
