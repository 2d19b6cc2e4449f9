//! Experiment manifests: enough provenance to re-run a command and get
//! bit-identical outputs for a fixed thread count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to file outputs (or to an explicit path):
/// the subcommand, its fully resolved parameters, the seed actually used,
/// the tool version, a content hash per input file, and the written outputs.
#[derive(Debug, Serialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_hashes: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
}

impl ExperimentManifest {
    pub fn new(command: &str, parameters: impl Serialize) -> Result<Self> {
        Ok(ExperimentManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_hashes: BTreeMap::new(),
            output_paths: Vec::new(),
        })
    }

    /// Records the SHA-256 of an input file's raw bytes.
    pub fn hash_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.input_hashes.insert(path.display().to_string(), hex(&digest));
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.output_paths.push(path.display().to_string());
    }

    /// Writes the manifest to `explicit` when given, otherwise next to the
    /// first recorded output (`<output>.manifest.json`). Commands that only
    /// print to stdout produce no manifest unless one is requested.
    pub fn write(&self, explicit: Option<&Path>) -> Result<()> {
        let target: Option<PathBuf> = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => self
                .output_paths
                .first()
                .map(|first| PathBuf::from(format!("{first}.manifest.json"))),
        };
        let Some(target) = target else { return Ok(()) };
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&target, text).with_context(|| format!("writing {}", target.display()))?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
