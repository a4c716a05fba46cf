//! Buffered outputs and the run manifest.
//!
//! Files are collected in memory and written only once a command has
//! produced all of them, so a failing run leaves no partial results.

use std::path::{Path, PathBuf};

use serde::Serialize;
use vo2osc::config::Config;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Override {
    pub key: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Config,
    pub overrides: Vec<Override>,
    pub seed: u64,
    /// Set when `VO2_OSC_SEED` replaced the configured seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_from_env: Option<u64>,
    pub version: &'static str,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.add(name, text);
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    /// Moves another set's files and warnings into this one.
    pub fn absorb(&mut self, other: Outputs) {
        self.files.extend(other.files);
        for w in other.warnings {
            self.warn(w);
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes every buffered file into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, contents) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, contents)?;
            paths.push(p);
        }
        Ok(paths)
    }
}
