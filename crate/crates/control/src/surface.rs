//! The live codebook of a panel. The RIS agent writes it; the receiver
//! measures whatever is currently applied.

use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use ris_core::Codebook;

pub trait Surface: Send + Sync {
    fn apply(&self, cb: &Codebook) -> io::Result<()>;
    fn current(&self) -> io::Result<Codebook>;
}

/// Surface shared between threads of one process.
#[derive(Debug, Clone)]
pub struct MemorySurface(Arc<Mutex<Codebook>>);

impl MemorySurface {
    pub fn new(initial: Codebook) -> Self {
        Self(Arc::new(Mutex::new(initial)))
    }
}

impl Surface for MemorySurface {
    fn apply(&self, cb: &Codebook) -> io::Result<()> {
        *self.0.lock().expect("surface lock") = cb.clone();
        Ok(())
    }

    fn current(&self) -> io::Result<Codebook> {
        Ok(self.0.lock().expect("surface lock").clone())
    }
}

/// Surface backed by a RISCB file, for agents in separate processes.
/// Until the first write the surface reads as `initial`.
#[derive(Debug, Clone)]
pub struct FileSurface {
    path: PathBuf,
    initial: Codebook,
}

impl FileSurface {
    pub fn new(path: impl Into<PathBuf>, initial: Codebook) -> Self {
        Self {
            path: path.into(),
            initial,
        }
    }
}

impl Surface for FileSurface {
    fn apply(&self, cb: &Codebook) -> io::Result<()> {
        let dir = match self.path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let tmp = tempfile::NamedTempFile::new_in(dir)?;
        fs::write(tmp.path(), cb.to_text())?;
        tmp.persist(&self.path).map_err(|e| e.error)?;
        Ok(())
    }

    fn current(&self) -> io::Result<Codebook> {
        match fs::read_to_string(&self.path) {
            Ok(text) => Codebook::from_text(&text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(self.initial.clone()),
            Err(e) => Err(e),
        }
    }
}
