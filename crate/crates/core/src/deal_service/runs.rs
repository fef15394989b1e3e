//! Content-addressed run directories under `<root>/runs/<id>`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Inputs that identify a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenarios: usize,
    pub seed: u64,
    pub alpha: f64,
}

/// Run id: the first 16 hex digits of a hash over the engine version,
/// the canonical deal file and the run config.
pub fn run_id(canonical_deal: &[u8], cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(ENGINE_VERSION.as_bytes());
    h.update([0]);
    h.update(canonical_deal);
    h.update([0]);
    h.update(cfg.scenarios.to_le_bytes());
    h.update(cfg.seed.to_le_bytes());
    h.update(cfg.alpha.to_bits().to_le_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Metadata written last as `run.json`; it carries timestamps and is not
/// part of the report digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub engine_version: String,
    pub deal_hash: String,
    pub seed: u64,
    pub scenarios: usize,
    pub alpha: f64,
    pub started_at: u64,
    pub finished_at: u64,
    /// Artifact file name to SHA-256.
    pub artifacts: BTreeMap<String, String>,
}

impl RunRecord {
    /// Digest over every artifact digest, in name order.
    pub fn report_digest(&self) -> String {
        let mut h = Sha256::new();
        for (name, digest) in &self.artifacts {
            h.update(name.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// The on-disk store.
#[derive(Debug, Clone)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, id: &str) -> PathBuf {
        self.root.join("runs").join(id)
    }

    pub fn draft_path(&self) -> PathBuf {
        self.root.join("draft.json")
    }

    /// Whether `id` looks like a run id, so it is safe as a path component.
    pub fn valid_id(id: &str) -> bool {
        id.len() == 16 && id.bytes().all(|b| b.is_ascii_hexdigit())
    }

    pub fn read_artifact(&self, id: &str, name: &str) -> Result<Option<Vec<u8>>> {
        if !Self::valid_id(id) || name.starts_with('.') || name.contains(['/', '\\']) {
            return Ok(None);
        }
        match std::fs::read(self.run_dir(id).join(name)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn record(&self, id: &str) -> Result<Option<RunRecord>> {
        Ok(match self.read_artifact(id, "run.json")? {
            Some(b) => Some(serde_json::from_slice(&b)?),
            None => None,
        })
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, dir.join(name))?;
    Ok(())
}
