//! Run manifests: every output file content-hashed, written last, verifiable.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub config: BTreeMap<String, String>,
    pub input_graph_hash: Option<String>,
    pub outputs: Vec<OutputFile>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_NAME), body)
            .with_context(|| format!("writing manifest into {}", dir.display()))?;
        Ok(())
    }
}

/// Re-hashes every listed output against the manifest.
pub fn verify_dir(dir: &Path) -> Result<()> {
    let raw = std::fs::read_to_string(dir.join(MANIFEST_NAME))
        .with_context(|| format!("no readable {MANIFEST_NAME} in {}", dir.display()))?;
    let manifest: Manifest = serde_json::from_str(&raw).context("manifest does not parse")?;
    for out in &manifest.outputs {
        let path = dir.join(&out.path);
        let bytes = std::fs::read(&path)
            .with_context(|| format!("listed output {} is missing", out.path))?;
        let got = sha256_hex(&bytes);
        if got != out.sha256 {
            bail!("hash mismatch for {}: manifest {}, file {}", out.path, out.sha256, got);
        }
    }
    Ok(())
}
