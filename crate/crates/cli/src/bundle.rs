//! Result bundles: files land in a hidden sibling directory that is renamed
//! into place only after everything has been written.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub toolkit_version: String,
    pub started_utc: String,
    pub finished_utc: String,
    pub files: Vec<String>,
}

pub fn config_hash(raw: &[u8]) -> String {
    hex::encode(Sha256::digest(raw))
}

pub struct Bundle {
    staging: PathBuf,
    target: PathBuf,
    files: Vec<String>,
    committed: bool,
}

impl Bundle {
    pub fn create(target: &Path) -> CliResult<Self> {
        let name = target
            .file_name()
            .ok_or_else(|| {
                CliError::Io(format!(
                    "output path '{}' has no final component",
                    target.display()
                ))
            })?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging)
            .map_err(|e| CliError::Io(format!("{}: {e}", staging.display())))?;
        Ok(Self {
            staging,
            target: target.to_path_buf(),
            files: Vec::new(),
            committed: false,
        })
    }

    /// Opens a new file inside the bundle.
    pub fn file(&mut self, name: &str) -> CliResult<BufWriter<File>> {
        let f = File::create(self.staging.join(name))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        fs::write(self.staging.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes the manifest and moves the bundle to its final path,
    /// replacing an earlier bundle there.
    pub fn commit(mut self, manifest: &Manifest) -> CliResult<PathBuf> {
        let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        fs::write(self.staging.join("manifest.json"), json)?;
        let mut displaced = None;
        if self.target.exists() {
            let aside = self.staging.with_extension("old");
            fs::rename(&self.target, &aside)?;
            displaced = Some(aside);
        }
        if let Err(e) = fs::rename(&self.staging, &self.target) {
            if let Some(aside) = &displaced {
                let _ = fs::rename(aside, &self.target);
            }
            return Err(CliError::Io(format!("{}: {e}", self.target.display())));
        }
        self.committed = true;
        if let Some(aside) = displaced {
            fs::remove_dir_all(aside)?;
        }
        Ok(self.target.clone())
    }
}

impl Drop for Bundle {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
