use std::path::Path;

use anyhow::{Context, Result};
use crysgen_core::io::RunConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }
}

/// Reproducibility record written next to every batch output. Contains no
/// timestamps, so identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub kind: &'static str,
    pub command: &'static str,
    pub artifact_version: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub config: String,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    /// The output directory is left out of the recorded configuration: the
    /// manifest already lives there, and moving a run must not change it.
    pub fn new(command: &'static str, config: &RunConfig) -> Self {
        let config_toml = RunConfig {
            output_dir: None,
            ..config.clone()
        }
        .to_toml();
        let seed = config.seed;
        Manifest {
            schema_version: crysgen_core::tasks::REPORT_SCHEMA_VERSION,
            kind: "manifest",
            command,
            artifact_version: env!("CARGO_PKG_VERSION"),
            seed,
            config_sha256: sha256_hex(config_toml.as_bytes()),
            config: config_toml,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    /// Record `name` inside `dir`.
    pub fn output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let mut d = FileDigest::of(&dir.join(name))?;
        d.path = name.to_string();
        self.outputs.push(d);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        crysgen_core::io::write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
        Ok(())
    }
}
