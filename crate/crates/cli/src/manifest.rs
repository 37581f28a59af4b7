use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub checkpoint_hash: Option<String>,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

/// What a command reports back for its manifest.
#[derive(Debug, Default)]
pub struct RunRecord {
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub checkpoint_hash: Option<String>,
    /// Where the manifest goes unless `--manifest` overrides it.
    pub manifest_path: Option<PathBuf>,
}

impl RunRecord {
    pub fn input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn output(&mut self, name: &str, path: &Path) {
        self.outputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn config_pairs(&mut self, pairs: Vec<(String, String)>) {
        self.config.extend(pairs);
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Manifest path next to a file output: `report.tsv` gives `report.tsv.manifest.json`.
pub fn beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn write(manifest: &RunManifest, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, json + "\n").with_context(|| format!("writing manifest {}", path.display()))
}
