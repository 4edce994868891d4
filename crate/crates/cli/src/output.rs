use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use fractal_index::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Writes files into an output directory through temp files and renames.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.root.join(name)).map_err(|e| Error::Io(e.error))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &fractal_index::io::to_json(value)?)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub arguments: Vec<String>,
    /// SHA-256 over the arguments and any config file contents.
    pub input_hash: String,
    pub elapsed_seconds: f64,
    pub status: String,
    pub checks: Vec<CheckResult>,
    pub outputs: Vec<String>,
}

pub fn input_hash(arguments: &[String], config: Option<&str>) -> String {
    let mut h = Sha256::new();
    for a in arguments {
        h.update(a.as_bytes());
        h.update([0u8]);
    }
    if let Some(c) = config {
        h.update(b"config\0");
        h.update(c.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn elapsed(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e6
}
