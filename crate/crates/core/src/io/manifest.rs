use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one run: configuration echo, version, wall-clock span and a
/// checksum for every file the run left in its output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect(dir: &Path, base: &Path, out: &mut Vec<FileEntry>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            collect(&p, base, out)?;
        } else {
            let rel = p.strip_prefix(base).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            if rel == MANIFEST_NAME {
                continue;
            }
            let bytes = e.metadata().map_err(|err| Error::io(&p, err))?.len();
            out.push(FileEntry { path: rel, bytes, sha256: sha256_file(&p)? });
        }
    }
    Ok(())
}

impl RunManifest {
    /// Inventories `dir` (except the manifest itself) and writes the
    /// manifest into it.
    pub fn write(dir: &Path, config: serde_json::Value, started_unix: f64) -> Result<RunManifest> {
        let mut files = Vec::new();
        collect(dir, dir, &mut files)?;
        let m = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            started_unix,
            finished_unix: unix_now(),
            files,
        };
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&m).expect("manifests serialize");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(m)
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format { path, message: e.to_string() })
    }

    /// Names of files whose presence or checksum disagrees with the inventory.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut now = Vec::new();
        collect(dir, dir, &mut now)?;
        let mut bad: Vec<String> = now.iter().filter(|f| !self.files.contains(f)).map(|f| f.path.clone()).collect();
        bad.extend(self.files.iter().filter(|f| !now.contains(f)).map(|f| f.path.clone()));
        bad.sort();
        bad.dedup();
        Ok(bad)
    }
}
