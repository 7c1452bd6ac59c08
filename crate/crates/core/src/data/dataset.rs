//! Real-dataset ingestion: the UCI concrete CSV and Fashion-MNIST IDX files.

use super::{DataLaw, EmpiricalRows};
use crate::error::{Error, Result};
use crate::oracle::RngStream;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Per-column affine standardisation `(v − mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
}

/// A supervised dataset: `n` rows of features `z ∈ R^{m1}` and targets
/// `y ∈ R^{m2}`, with a train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub m1: usize,
    pub m2: usize,
    /// Row-major `n × m1`.
    pub features: Vec<f64>,
    /// Row-major `n × m2`.
    pub targets: Vec<f64>,
    pub standardization: Option<Standardization>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub provenance: String,
}

impl Dataset {
    /// Number of rows.
    pub fn len(&self) -> usize {
        self.features.len() / self.m1.max(1)
    }

    /// True when there are no rows.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Features of row `i`.
    pub fn z(&self, i: usize) -> &[f64] {
        &self.features[i * self.m1..(i + 1) * self.m1]
    }

    /// Targets of row `i`.
    pub fn y(&self, i: usize) -> &[f64] {
        &self.targets[i * self.m2..(i + 1) * self.m2]
    }

    /// Writes the oracle data layout `x = (y, z)` of row `i` into `out`.
    pub fn write_sample(&self, i: usize, out: &mut [f64]) {
        out[..self.m2].copy_from_slice(self.y(i));
        out[self.m2..self.m2 + self.m1].copy_from_slice(self.z(i));
    }

    /// The training rows as an empirical law over `x = (y, z)`.
    pub fn train_law(&self) -> DataLaw {
        let dim = self.m1 + self.m2;
        let mut values = vec![0.0; self.train_idx.len() * dim];
        for (k, &i) in self.train_idx.iter().enumerate() {
            self.write_sample(i, &mut values[k * dim..(k + 1) * dim]);
        }
        DataLaw::Empirical(Arc::new(EmpiricalRows { dim, values }))
    }

    /// Builds a dataset from in-memory rows, with every row in the training set.
    pub fn from_rows(m1: usize, m2: usize, features: Vec<f64>, targets: Vec<f64>, provenance: &str) -> Result<Self> {
        let n = features.len() / m1.max(1);
        if features.len() != n * m1 || targets.len() != n * m2 {
            return Err(Error::DimensionMismatch {
                context: "dataset rows",
                expected: n * m2,
                found: targets.len(),
            });
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Self {
            m1,
            m2,
            features,
            targets,
            standardization: None,
            train_idx: (0..n).collect(),
            test_idx: Vec::new(),
            provenance: provenance.to_string(),
        })
    }

    /// Seeded random split: `floor(test_fraction · n)` rows go to the test set.
    pub fn split(&mut self, seed: u64, test_fraction: f64) {
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).collect();
        shuffle(&mut idx, &mut RngStream::new(seed));
        let n_test = (test_fraction * n as f64).floor() as usize;
        self.test_idx = idx[..n_test].to_vec();
        self.test_idx.sort_unstable();
        self.train_idx = idx[n_test..].to_vec();
        self.train_idx.sort_unstable();
    }

    /// Z-scores features and targets with statistics fitted on the training
    /// rows only (population standard deviation), applied to every row.
    pub fn standardize(&mut self) {
        let fit = |vals: &[f64], width: usize, rows: &[usize]| -> (Vec<f64>, Vec<f64>) {
            let mut mean = vec![0.0; width];
            let mut std = vec![0.0; width];
            for &i in rows {
                for c in 0..width {
                    mean[c] += vals[i * width + c];
                }
            }
            mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
            for &i in rows {
                for c in 0..width {
                    let d = vals[i * width + c] - mean[c];
                    std[c] += d * d;
                }
            }
            std.iter_mut().for_each(|s| {
                *s = (*s / rows.len() as f64).sqrt();
                if *s == 0.0 {
                    *s = 1.0;
                }
            });
            (mean, std)
        };
        let (fm, fs) = fit(&self.features, self.m1, &self.train_idx);
        let (tm, ts) = fit(&self.targets, self.m2, &self.train_idx);
        apply(&mut self.features, &fm, &fs);
        apply(&mut self.targets, &tm, &ts);
        self.standardization = Some(Standardization {
            feature_mean: fm,
            feature_std: fs,
            target_mean: tm,
            target_std: ts,
        });
    }

    /// Stratified subsample of the training rows: `n / classes` rows per
    /// class, where the class of a row is the argmax of its one-hot target.
    pub fn stratified_subsample(&self, n: usize, seed: u64) -> Dataset {
        let classes = self.m2;
        let per = n / classes.max(1);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
        for &i in &self.train_idx {
            by_class[argmax(self.y(i))].push(i);
        }
        let mut rng = RngStream::new(seed);
        let mut chosen = Vec::with_capacity(n);
        for rows in by_class.iter_mut() {
            shuffle(rows, &mut rng);
            chosen.extend(rows.iter().take(per));
        }
        chosen.sort_unstable();
        let mut features = Vec::with_capacity(chosen.len() * self.m1);
        let mut targets = Vec::with_capacity(chosen.len() * self.m2);
        for &i in &chosen {
            features.extend_from_slice(self.z(i));
            targets.extend_from_slice(self.y(i));
        }
        Dataset {
            m1: self.m1,
            m2: self.m2,
            features,
            targets,
            standardization: self.standardization.clone(),
            train_idx: (0..chosen.len()).collect(),
            test_idx: Vec::new(),
            provenance: format!("{} | stratified subsample n={} seed={}", self.provenance, chosen.len(), seed),
        }
    }
}

fn apply(vals: &mut [f64], mean: &[f64], std: &[f64]) {
    let w = mean.len();
    for (k, v) in vals.iter_mut().enumerate() {
        let c = k % w;
        *v = (*v - mean[c]) / std[c];
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// Fisher–Yates shuffle driven by the crate's RNG stream.
pub fn shuffle<T>(v: &mut [T], rng: &mut RngStream) {
    for i in (1..v.len()).rev() {
        let j = rng.index(i + 1);
        v.swap(i, j);
    }
}

/// Which CSV columns are features and which is the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ColumnManifest {
    /// Feature column names; empty means "every column except the target".
    #[serde(default)]
    pub features: Vec<String>,
    /// Target column name; `None` means the last column.
    #[serde(default)]
    pub target: Option<String>,
    /// Expected row count, checked when set.
    #[serde(default)]
    pub expected_rows: Option<usize>,
}

/// Loads the concrete compressive-strength CSV (header row, numeric cells),
/// splits it with `seed` and z-scores features and targets on the training
/// rows.
pub fn load_concrete_csv(path: &Path, manifest: &ColumnManifest, seed: u64, test_fraction: f64) -> Result<Dataset> {
    let file = path.display().to_string();
    let data_err = |message: String| Error::Data { file: file.clone(), message };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(e.to_string()))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| data_err(e.to_string()))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if headers.len() < 2 {
        return Err(data_err(format!("expected at least 2 columns, found {}", headers.len())));
    }
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data_err(format!("column '{name}' named in the manifest is not in the header")))
    };
    let target = match &manifest.target {
        Some(name) => col(name)?,
        None => headers.len() - 1,
    };
    let feature_cols: Vec<usize> = if manifest.features.is_empty() {
        (0..headers.len()).filter(|&c| c != target).collect()
    } else {
        manifest.features.iter().map(|n| col(n)).collect::<Result<_>>()?
    };
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data_err(e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(data_err(format!(
                "row {}: expected {} columns, found {}",
                row + 2,
                headers.len(),
                rec.len()
            )));
        }
        let cell = |c: usize| -> Result<f64> {
            let s = &rec[c];
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| data_err(format!("row {}, column {} ('{}'): non-numeric cell '{s}'", row + 2, c + 1, headers[c])))
        };
        for &c in &feature_cols {
            features.push(cell(c)?);
        }
        targets.push(cell(target)?);
    }
    let n = targets.len();
    if let Some(expected) = manifest.expected_rows {
        if n != expected {
            return Err(data_err(format!("expected {expected} rows, found {n}")));
        }
    }
    let names: Vec<&str> = feature_cols.iter().map(|&c| headers[c].as_str()).collect();
    let provenance = format!(
        "{file}: {n} rows, {} feature columns [{}], target '{}'",
        feature_cols.len(),
        names.join(", "),
        headers[target]
    );
    let mut ds = Dataset::from_rows(feature_cols.len(), 1, features, targets, &provenance)?;
    ds.split(seed, test_fraction);
    ds.standardize();
    Ok(ds)
}

fn read_be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Loads an IDX image file (magic `0x00000803`) and its label file (magic
/// `0x00000801`). Pixels are scaled to `[0,1]`, labels one-hot encoded over
/// 10 classes. Every row is placed in the training set.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let err = |p: &Path, message: String| Error::Data {
        file: p.display().to_string(),
        message,
    };
    let img = std::fs::read(images).map_err(|e| err(images, e.to_string()))?;
    let lab = std::fs::read(labels).map_err(|e| err(labels, e.to_string()))?;
    let magic = read_be_u32(&img, 0).ok_or_else(|| err(images, "truncated header".into()))?;
    if magic != 0x0000_0803 {
        return Err(err(images, format!("magic number 0x{magic:08x}, expected 0x00000803")));
    }
    let lmagic = read_be_u32(&lab, 0).ok_or_else(|| err(labels, "truncated header".into()))?;
    if lmagic != 0x0000_0801 {
        return Err(err(labels, format!("magic number 0x{lmagic:08x}, expected 0x00000801")));
    }
    let header = |b: &[u8], p: &Path, at: usize| read_be_u32(b, at).ok_or_else(|| err(p, "truncated header".into()));
    let n = header(&img, images, 4)? as usize;
    let rows = header(&img, images, 8)? as usize;
    let cols = header(&img, images, 12)? as usize;
    let nl = header(&lab, labels, 4)? as usize;
    if nl != n {
        return Err(err(labels, format!("{nl} labels for {n} images")));
    }
    let m1 = rows * cols;
    if img.len() < 16 + n * m1 {
        return Err(err(images, format!("truncated file: {} bytes, expected {}", img.len(), 16 + n * m1)));
    }
    if lab.len() < 8 + n {
        return Err(err(labels, format!("truncated file: {} bytes, expected {}", lab.len(), 8 + n)));
    }
    let features: Vec<f64> = img[16..16 + n * m1].iter().map(|&p| p as f64 / 255.0).collect();
    let mut targets = vec![0.0; n * 10];
    for (i, &l) in lab[8..8 + n].iter().enumerate() {
        if l >= 10 {
            return Err(err(labels, format!("label {l} at index {i} outside 0..10")));
        }
        targets[i * 10 + l as usize] = 1.0;
    }
    Dataset::from_rows(m1, 10, features, targets, &format!("{} ({n} images {rows}x{cols})", images.display()))
}
