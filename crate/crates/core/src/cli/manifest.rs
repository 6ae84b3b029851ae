use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that changes between
    /// identical runs.
    pub created_unix: u64,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Output directory that remembers every file written through it.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl ArtifactDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
        Ok(ArtifactDir { root: root.to_path_buf(), entries: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.record(name, bytes);
        Ok(path)
    }

    /// Runs a streaming writer into `name`.
    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    /// Registers a file some other routine already wrote into the directory.
    pub fn adopt(&mut self, path: &Path) -> Result<()> {
        let name = path
            .strip_prefix(&self.root)
            .map_err(|_| Error::Io(format!("{} lies outside {}", path.display(), self.root.display())))?
            .to_string_lossy()
            .into_owned();
        let bytes = std::fs::read(path)?;
        self.record(&name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.entries.retain(|e| e.path != name);
        self.entries.push(ArtifactEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.entries
    }

    pub fn finish(self, subcommand: &str, config_text: &str, seed: u64) -> Result<Manifest> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            created_unix,
            artifacts: self.entries,
        };
        let path = self.root.join(MANIFEST_NAME);
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(manifest)
    }
}
