use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{CertificateFile, FormatError};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("certificate store I/O: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Flat directory of certificates named by content id.
#[derive(Debug, Clone)]
pub struct CertStore {
    dir: PathBuf,
}

impl CertStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(CertStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Writes through a temporary file and renames it into place, so readers
    /// never observe a partial certificate. Returns the content id.
    pub fn put(&self, cert: &CertificateFile) -> Result<String, StoreError> {
        let id = cert.content_id();
        let target = self.path_of(&id);
        if target.exists() {
            return Ok(id);
        }
        let tmp = self.dir.join(format!(".{id}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(cert.to_json().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target)?;
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<CertificateFile, StoreError> {
        let text = fs::read_to_string(self.path_of(id))?;
        Ok(CertificateFile::from_json(&text)?)
    }
}
