//! Data laws with analytic densities, and ingestion of the real datasets.
//!
//! Synthetic laws carry their density, CDF, sup-bound `c_X`, Lipschitz
//! constant `L_X` and moments `E[(1+s|X|)^k]` where these are known in
//! closed form. Real datasets are exposed as empirical laws.

mod dataset;

pub use dataset::{load_concrete_csv, load_idx, shuffle, ColumnManifest, Dataset, Standardization};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, ln_binomial, log_sum_exp};
use crate::oracle::{DataSample, RngStream};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

/// Tag naming a data law; serialisable form of [`DataLaw`] for synthetic laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawTag {
    Beta22,
    StdNormal,
    Uniform01,
}

/// Law of the i.i.d. data stream `X_n`.
#[derive(Debug, Clone)]
pub enum DataLaw {
    /// Beta(2,2) on `[0,1]`, density `6x(1−x)`.
    Beta22,
    /// Standard normal on `R`.
    StdNormal,
    /// Uniform on `[0,1]`.
    Uniform01,
    /// Uniform on the unit box `[0,1]^dim`.
    UniformBox { dim: usize },
    /// Uniform draw (with replacement) from a fixed set of rows.
    Empirical(Arc<EmpiricalRows>),
}

/// Row-major sample table backing an empirical law.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRows {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl EmpiricalRows {
    /// Number of rows.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim.max(1)
    }

    /// True when the table holds no rows.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

impl From<LawTag> for DataLaw {
    fn from(t: LawTag) -> Self {
        match t {
            LawTag::Beta22 => DataLaw::Beta22,
            LawTag::StdNormal => DataLaw::StdNormal,
            LawTag::Uniform01 => DataLaw::Uniform01,
        }
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Inverse CDF of Beta(2,2): the root in `[0,1]` of `3x² − 2x³ = u`.
///
/// With `x = 1/2 + y` the cubic becomes `4y³ − 3y = 1 − 2u`, solved by the
/// Chebyshev identity `cos 3φ = 4cos³φ − 3cos φ` on the branch with
/// `y ∈ [−1/2, 1/2]`.
pub fn beta22_quantile(u: f64) -> f64 {
    let phi = (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos() / 3.0;
    (0.5 + (phi - 2.0 * PI / 3.0).cos()).clamp(0.0, 1.0)
}

impl DataLaw {
    /// Dimension `m` of one draw.
    pub fn dim(&self) -> usize {
        match self {
            DataLaw::Beta22 | DataLaw::StdNormal | DataLaw::Uniform01 => 1,
            DataLaw::UniformBox { dim } => *dim,
            DataLaw::Empirical(rows) => rows.dim,
        }
    }

    /// Human-readable name.
    pub fn name(&self) -> String {
        match self {
            DataLaw::Beta22 => "Beta(2,2)".into(),
            DataLaw::StdNormal => "N(0,1)".into(),
            DataLaw::Uniform01 => "Uniform(0,1)".into(),
            DataLaw::UniformBox { dim } => format!("Uniform(0,1)^{dim}"),
            DataLaw::Empirical(rows) => format!("Empirical({} rows)", rows.len()),
        }
    }

    /// Writes one draw into `out` (length [`dim`](Self::dim)).
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            DataLaw::Beta22 => {
                // The median of three uniforms is Beta(2,2); cheaper than inversion.
                let (a, b, c) = (rng.uniform(), rng.uniform(), rng.uniform());
                out[0] = a.max(b).min(a.min(b).max(c));
            }
            DataLaw::StdNormal => out[0] = rng.normal(),
            DataLaw::Uniform01 => out[0] = rng.uniform(),
            DataLaw::UniformBox { .. } => {
                for o in out.iter_mut() {
                    *o = rng.uniform();
                }
            }
            DataLaw::Empirical(rows) => {
                let i = rng.index(rows.len());
                out.copy_from_slice(rows.row(i));
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<DataSample> {
        let mut buf = vec![0.0; self.dim()];
        (0..n)
            .map(|_| {
                self.sample_into(rng, &mut buf);
                DataSample::new(buf.clone()).expect("samplers produce finite values")
            })
            .collect()
    }

    /// Density of a one-dimensional law, `None` otherwise.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            DataLaw::Beta22 => Some(if (0.0..=1.0).contains(&x) { 6.0 * x * (1.0 - x) } else { 0.0 }),
            DataLaw::StdNormal => Some(INV_SQRT_2PI * (-0.5 * x * x).exp()),
            DataLaw::Uniform01 => Some(if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    /// CDF of a one-dimensional law.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            DataLaw::Beta22 => {
                let t = x.clamp(0.0, 1.0);
                Ok(t * t * (3.0 - 2.0 * t))
            }
            DataLaw::StdNormal => Ok(0.5 * erfc(-x * FRAC_1_SQRT_2)),
            DataLaw::Uniform01 => Ok(x.clamp(0.0, 1.0)),
            other => Err(Error::CdfUnavailable(other.name())),
        }
    }

    /// Sup-bound `c_X` and Lipschitz constant `L_X` of the density, when the
    /// density is bounded and Lipschitz.
    pub fn density_constants(&self) -> Option<(f64, f64)> {
        match self {
            // max 6x(1−x) at x=1/2; |f'(x)| = |6−12x| ≤ 6.
            DataLaw::Beta22 => Some((1.5, 6.0)),
            // max φ at 0; |φ'(x)| = |x|φ(x) peaks at |x| = 1.
            DataLaw::StdNormal => Some((INV_SQRT_2PI, INV_SQRT_2PI * (-0.5f64).exp())),
            _ => None,
        }
    }

    /// `ln E[(1 + s|X|)^k]` in closed form or by quadrature, when available.
    ///
    /// Integer orders use the binomial expansion over absolute moments, so
    /// every term is positive and nothing cancels. Returns `None` for laws
    /// without an analytic treatment (use Monte Carlo instead).
    pub fn ln_moment(&self, s: f64, k: f64) -> Option<f64> {
        if k == 0.0 {
            return Some(0.0);
        }
        let integer = k >= 0.0 && k.fract() == 0.0 && k <= 4096.0;
        match self {
            DataLaw::Beta22 => {
                if integer {
                    // E X^j = 6 / ((j+2)(j+3)).
                    let n = k as u64;
                    let terms: Vec<f64> = (0..=n)
                        .map(|j| {
                            let jf = j as f64;
                            ln_binomial(n, j) + jf * s.ln() + (6.0 / ((jf + 2.0) * (jf + 3.0))).ln()
                        })
                        .collect();
                    Some(log_sum_exp(&terms))
                } else {
                    let v = adaptive_simpson(&|x| (1.0 + s * x).powf(k) * 6.0 * x * (1.0 - x), 0.0, 1.0, 1e-14);
                    Some(v.ln())
                }
            }
            DataLaw::StdNormal => {
                if integer {
                    // E|X|^j = 2^{j/2} Γ((j+1)/2) / √π.
                    let n = k as u64;
                    let terms: Vec<f64> = (0..=n)
                        .map(|j| {
                            let jf = j as f64;
                            ln_binomial(n, j)
                                + jf * s.ln()
                                + 0.5 * jf * std::f64::consts::LN_2
                                + ln_gamma((jf + 1.0) / 2.0)
                                - 0.5 * PI.ln()
                        })
                        .collect();
                    Some(log_sum_exp(&terms))
                } else {
                    let upper = 40.0 + 2.0 * k.abs().sqrt();
                    let v = adaptive_simpson(
                        &|x| (1.0 + s * x).powf(k) * 2.0 * INV_SQRT_2PI * (-0.5 * x * x).exp(),
                        0.0,
                        upper,
                        1e-14,
                    );
                    Some(v.ln())
                }
            }
            DataLaw::Uniform01 => {
                // ∫_0^1 (1+sx)^k dx = ((1+s)^{k+1} − 1) / (s(k+1)).
                if (k + 1.0).abs() < 1e-12 {
                    Some(((1.0 + s).ln() / s).ln())
                } else {
                    Some((((1.0 + s).powf(k + 1.0) - 1.0) / (s * (k + 1.0))).ln())
                }
            }
            DataLaw::UniformBox { .. } => None,
            DataLaw::Empirical(rows) => {
                let terms: Vec<f64> = (0..rows.len())
                    .map(|i| k * (1.0 + s * crate::oracle::norm(rows.row(i))).ln())
                    .collect();
                Some(log_sum_exp(&terms) - (rows.len() as f64).ln())
            }
        }
    }

    /// Monte-Carlo estimate of `E[(1 + s|X|)^k]` with its standard error.
    pub fn mc_moment(&self, s: f64, k: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed);
        let mut buf = vec![0.0; self.dim()];
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            self.sample_into(&mut rng, &mut buf);
            let v = (1.0 + s * crate::oracle::norm(&buf)).powf(k);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let var = (sum2 / n as f64 - mean * mean).max(0.0);
        (mean, (var / n as f64).sqrt())
    }
}
