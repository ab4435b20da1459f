//! Durable per-location codebook store.
//!
//! On disk the store is a single JSON document:
//!
//! ```text
//! {"version":1,"entries":{"LocA":"RISCB v1 rows=...\n..."}}
//! ```
//!
//! Every write replaces the file atomically (temp file in the same
//! directory, then rename), so a crash never leaves a half-written store.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ris_core::Codebook;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STORE_VERSION: u32 = 1;
pub const MAX_LOCATION_ID_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("store file {path} is invalid: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("invalid location id {0:?}")]
    BadLocation(String),
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    version: u32,
    entries: BTreeMap<String, Codebook>,
}

pub fn validate_location_id(id: &str) -> Result<(), StoreError> {
    if id.is_empty() || id.len() > MAX_LOCATION_ID_LEN || id.chars().any(char::is_control) {
        return Err(StoreError::BadLocation(id.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CodebookStore {
    entries: BTreeMap<String, Codebook>,
    path: Option<PathBuf>,
}

impl CodebookStore {
    /// A store that lives only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens the store at `path`; a missing file is an empty store.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let entries = match fs::read_to_string(&path) {
            Ok(text) => {
                let file: StoreFile = serde_json::from_str(&text).map_err(|e| StoreError::Format {
                    path: path.clone(),
                    msg: e.to_string(),
                })?;
                if file.version != STORE_VERSION {
                    return Err(StoreError::Format {
                        path,
                        msg: format!("unsupported version {}", file.version),
                    });
                }
                for id in file.entries.keys() {
                    validate_location_id(id)?;
                }
                file.entries
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(source) => return Err(StoreError::Io { path, source }),
        };
        Ok(Self {
            entries,
            path: Some(path),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<&Codebook> {
        self.entries.get(id)
    }

    /// Location ids in sorted order.
    pub fn ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or replaces an entry and persists. On a write failure the
    /// in-memory state is rolled back.
    pub fn insert(&mut self, id: &str, cb: Codebook) -> Result<(), StoreError> {
        validate_location_id(id)?;
        let previous = self.entries.insert(id.to_string(), cb);
        if let Err(e) = self.persist() {
            match previous {
                Some(p) => self.entries.insert(id.to_string(), p),
                None => self.entries.remove(id),
            };
            return Err(e);
        }
        Ok(())
    }

    /// Removes an entry and persists. Returns `false` if it was absent.
    pub fn remove(&mut self, id: &str) -> Result<bool, StoreError> {
        let Some(previous) = self.entries.remove(id) else {
            return Ok(false);
        };
        if let Err(e) = self.persist() {
            self.entries.insert(id.to_string(), previous);
            return Err(e);
        }
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StoreFile {
            version: STORE_VERSION,
            entries: self.entries.clone(),
        })
        .expect("store serializes")
    }

    fn persist(&self) -> Result<(), StoreError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
        tmp.write_all(self.to_json().as_bytes()).map_err(io_err)?;
        tmp.write_all(b"\n").map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(path).map_err(|e| io_err(e.error))?;
        Ok(())
    }
}
