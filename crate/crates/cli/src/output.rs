//! Result-bundle writing: every file goes through a temp file in the target
//! directory and is renamed into place, so readers never see partial files.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes files atomically into one bundle directory.
#[derive(Debug, Clone)]
pub struct BundleWriter {
    dir: PathBuf,
}

impl BundleWriter {
    /// Creates the directory (and parents) if needed.
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writer for a subdirectory.
    pub fn child(&self, name: &str) -> Result<Self> {
        Self::create(&self.dir.join(name))
    }

    /// Writes `bytes` to `name` via temp file + rename.
    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.dir.join(name);
        let parent = target.parent().unwrap_or(&self.dir);
        std::fs::create_dir_all(parent)?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| e.error)?;
        Ok(target)
    }

    /// Pretty-printed JSON.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write_bytes(name, &text)
    }

    /// CSV with a header row; floats use the shortest round-trip representation.
    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// CSV whose cells are already formatted.
    pub fn write_text_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }
}

/// Reads a numeric CSV written by [`BundleWriter::write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| std::io::Error::other(format!("{}: '{s}': {e}", path.display()))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Mean and sample standard deviation over the finite values of a set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    /// Number of finite values used.
    pub n: usize,
}

impl Stat {
    /// Non-finite values are skipped; an empty set gives `NaN` mean and std.
    pub fn of(values: &[f64]) -> Self {
        let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let n = vals.len();
        if n == 0 {
            return Stat { mean: f64::NAN, std: f64::NAN, n };
        }
        let mean = vals.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std, n }
    }
}
