//! Content-addressed artifact cache. Each entry is a directory
//! `<kind>-<hash>` holding the artifact files and an `entry.json` with their
//! SHA-256 digests; entries are published by atomic rename.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "FOCAL_LAB_CACHE";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub hash: String,
    pub kind: String,
    pub files: Vec<CachedFile>,
    pub created_by: String,
    #[serde(skip)]
    pub dir: PathBuf,
}

impl CacheEntry {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_dir(&self, kind: &str, hash: &str) -> PathBuf {
        self.root.join(format!("{kind}-{hash}"))
    }

    /// A verified entry, or `None` on a miss. Corrupted entries are logged
    /// and treated as misses.
    pub fn lookup(&self, hash: &str, kind: &str) -> Result<Option<CacheEntry>, CacheError> {
        let dir = self.entry_dir(kind, hash);
        let meta = dir.join("entry.json");
        if !meta.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&meta).map_err(io(&meta))?;
        let mut entry: CacheEntry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("corrupted cache entry {}: {e}", meta.display());
                return Ok(None);
            }
        };
        if entry.hash != hash || entry.kind != kind {
            log::warn!("cache entry {} does not match its key", dir.display());
            return Ok(None);
        }
        for f in &entry.files {
            let p = dir.join(&f.name);
            let ok = match std::fs::read(&p) {
                Ok(bytes) => sha256_hex(&bytes) == f.sha256,
                Err(_) => false,
            };
            if !ok {
                log::warn!("corrupted cache file {} (hash mismatch), ignoring entry", p.display());
                return Ok(None);
            }
        }
        entry.dir = dir;
        Ok(Some(entry))
    }

    /// Publishes files `(name, bytes)` under the key. An entry that already
    /// exists and verifies is kept.
    pub fn store(&self, hash: &str, kind: &str, files: &[(String, Vec<u8>)]) -> Result<CacheEntry, CacheError> {
        if let Some(e) = self.lookup(hash, kind)? {
            return Ok(e);
        }
        std::fs::create_dir_all(&self.root).map_err(io(&self.root))?;
        let tmp = self.root.join(format!(".tmp-{kind}-{hash}-{}", std::process::id()));
        if tmp.exists() {
            std::fs::remove_dir_all(&tmp).map_err(io(&tmp))?;
        }
        std::fs::create_dir_all(&tmp).map_err(io(&tmp))?;
        let mut listed = Vec::new();
        for (name, bytes) in files {
            let p = tmp.join(name);
            std::fs::write(&p, bytes).map_err(io(&p))?;
            listed.push(CachedFile {
                name: name.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        let entry = CacheEntry {
            hash: hash.into(),
            kind: kind.into(),
            files: listed,
            created_by: format!("focal-lab {}", env!("CARGO_PKG_VERSION")),
            dir: PathBuf::new(),
        };
        let meta = tmp.join("entry.json");
        std::fs::write(&meta, serde_json::to_string_pretty(&entry).expect("serializable")).map_err(io(&meta))?;
        let dir = self.entry_dir(kind, hash);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(io(&dir))?;
        }
        std::fs::rename(&tmp, &dir).map_err(io(&dir))?;
        Ok(CacheEntry { dir, ..entry })
    }
}
