//! Versioned CSV, JSON and SVG artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

/// First line of every CSV file written by the harness.
pub const CSV_VERSION_LINE: &str = "# cs-causality v1";

/// Collects artifacts under one output directory.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| HarnessError::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a CSV whose body is produced by `body`, prefixed with the
    /// version line.
    pub fn csv<F>(&mut self, name: &str, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        writeln!(buf, "{CSV_VERSION_LINE}").expect("write to memory");
        body(&mut buf).map_err(|e| HarnessError::io(self.root.join(name), e))?;
        self.write_bytes(name, &buf)
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Data(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<PathBuf> {
        self.write_bytes(name, svg.as_bytes())
    }
}

/// Strips the version line (and any other `#` comment lines) from CSV text.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
