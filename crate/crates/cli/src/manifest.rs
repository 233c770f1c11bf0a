//! Run manifests: every command that writes files also writes a
//! manifest.json recording the resolved configuration, seed, tool version
//! and the sha256 of each output. Replaying the same configuration
//! reproduces byte-identical outputs (the manifest's timestamp is the only
//! field allowed to differ).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub version: String,
    pub created_unix: u64,
    pub seed: u64,
    pub outputs: Vec<OutputDigest>,
}

pub struct ManifestWriter {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl ManifestWriter {
    pub fn new(out_dir: &Path, config: serde_json::Value, seed: u64) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output dir {}", out_dir.display()))?;
        Ok(ManifestWriter {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                command: std::env::args().collect(),
                config,
                version: env!("CARGO_PKG_VERSION").to_string(),
                created_unix: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                seed,
                outputs: Vec::new(),
            },
        })
    }

    /// Writes one output file and records its digest.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(contents);
        self.manifest.outputs.push(OutputDigest {
            path: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let path = self.out_dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(&path, body)?;
        Ok(path)
    }
}
