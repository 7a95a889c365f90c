//! Sidecar manifests describing how a data file was produced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::exit::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub zero_file_digest: Option<String>,
    pub table_limit: u64,
    pub wall_time_ms: u64,
    pub tool_version: String,
    /// Worker threads actually used.
    pub threads: usize,
    /// SHA-256 of the data file, hex encoded.
    pub result_digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<data file>.manifest.json`
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    data.with_file_name(name)
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Check the digest against the bytes of `data`.
    pub fn verify(&self, data: &Path) -> Result<()> {
        let bytes = std::fs::read(data).with_context(|| format!("reading {}", data.display()))?;
        let got = sha256_hex(&bytes);
        if got != self.result_digest {
            return Err(CliError::Unreliable(format!(
                "{} has digest {got}, manifest records {}",
                data.display(),
                self.result_digest
            ))
            .into());
        }
        Ok(())
    }
}
