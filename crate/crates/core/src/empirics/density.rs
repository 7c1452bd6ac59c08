//! Grid quadrature of the Gibbs density `π_β ∝ e^{−βu}` in one dimension.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 1 << 15;

/// Largest admissible ratio of boundary density to peak density.
pub const BOUNDARY_RATIO: f64 = 1e-12;

/// Uniform grid on `[lo, hi]` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    /// `[center − 6σ, center + 6σ]` with [`DEFAULT_GRID_POINTS`] nodes.
    pub fn around(center: f64, sigma: f64) -> Self {
        Self { lo: center - 6.0 * sigma, hi: center + 6.0 * sigma, points: DEFAULT_GRID_POINTS }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) || self.points < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid needs finite lo < hi and at least 3 points, got [{}, {}] with {}",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }

    /// Node spacing.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    /// The nodes.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * h }).collect()
    }
}

/// Tabulated normalised density with CDF and quantile function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDensity1D {
    pub grid: GridSpec,
    pub beta: f64,
    pub x: Vec<f64>,
    /// `e^{−βu(x_i) − s}` with `s = max_i(−βu(x_i))`.
    pub unnormalised: Vec<f64>,
    /// Normalised density values.
    pub density: Vec<f64>,
    /// Trapezoid CDF; non-decreasing, ends at exactly 1.
    pub cdf: Vec<f64>,
    /// `ln C̄_{π_β} = ln ∫ e^{−βu}`.
    pub ln_normaliser: f64,
    /// Cached `(k, E_π|θ|^k)` pairs.
    pub moments: Vec<(f64, f64)>,
}

/// Tabulates `π_β ∝ e^{−βu}` on `grid`.
///
/// Fails with [`Error::GridTooNarrow`] if the density at either end exceeds
/// [`BOUNDARY_RATIO`] times the peak. Moments of orders 2 and 4 are cached;
/// more can be added with [`TargetDensity1D::cache_moment`].
pub fn target_density_1d(u: &dyn Fn(f64) -> f64, beta: f64, grid: GridSpec) -> Result<TargetDensity1D> {
    grid.validate()?;
    if !(beta > 0.0) {
        return Err(Error::InvalidConfig(format!("β must be positive, got {beta}")));
    }
    let x = grid.nodes();
    let log_w: Vec<f64> = x.iter().map(|&t| -beta * u(t)).collect();
    if log_w.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("u on the density grid"));
    }
    let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::NonFinite("maximum of −βu on the density grid"));
    }
    let unnormalised: Vec<f64> = log_w.iter().map(|v| (v - shift).exp()).collect();
    let ends = unnormalised[0].max(unnormalised[grid.points - 1]);
    if ends > BOUNDARY_RATIO {
        return Err(Error::GridTooNarrow { ratio: ends, limit: BOUNDARY_RATIO });
    }
    let h = grid.step();
    let mut cum = vec![0.0; grid.points];
    for i in 1..grid.points {
        cum[i] = cum[i - 1] + 0.5 * h * (unnormalised[i - 1] + unnormalised[i]);
    }
    let z = cum[grid.points - 1];
    let density = unnormalised.iter().map(|w| w / z).collect();
    let mut cdf: Vec<f64> = cum.iter().map(|c| c / z).collect();
    cdf[grid.points - 1] = 1.0;
    let mut target = TargetDensity1D {
        grid,
        beta,
        x,
        unnormalised,
        density,
        cdf,
        ln_normaliser: shift + z.ln(),
        moments: Vec::new(),
    };
    target.cache_moment(2.0);
    target.cache_moment(4.0);
    Ok(target)
}

impl TargetDensity1D {
    /// `∫ f dπ_β` by the trapezoid rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.step();
        let n = self.x.len();
        let inner: f64 = (1..n - 1).map(|i| f(self.x[i]) * self.density[i]).sum();
        h * (inner + 0.5 * (f(self.x[0]) * self.density[0] + f(self.x[n - 1]) * self.density[n - 1]))
    }

    /// `E_π|θ|^k`, from the cache when present.
    pub fn abs_moment(&self, k: f64) -> f64 {
        match self.moments.iter().find(|(o, _)| *o == k) {
            Some(&(_, v)) => v,
            None => self.expect(|t| t.abs().powf(k)),
        }
    }

    /// Adds `E_π|θ|^k` to the cache.
    pub fn cache_moment(&mut self, k: f64) {
        if !self.moments.iter().any(|(o, _)| *o == k) {
            let v = self.abs_moment(k);
            self.moments.push((k, v));
        }
    }

    /// Mean of `π_β`.
    pub fn mean(&self) -> f64 {
        self.expect(|t| t)
    }

    /// Grid node of maximal density.
    pub fn mode(&self) -> f64 {
        let i = self
            .density
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.density[best] { i } else { best });
        self.x[i]
    }

    /// CDF at `t` by linear interpolation (0 below, 1 above the grid).
    pub fn cdf_at(&self, t: f64) -> f64 {
        if t <= self.grid.lo {
            return 0.0;
        }
        if t >= self.grid.hi {
            return 1.0;
        }
        let pos = (t - self.grid.lo) / self.grid.step();
        let i = (pos.floor() as usize).min(self.x.len() - 2);
        let w = pos - i as f64;
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Quantile `F⁻¹(p)` by monotone linear interpolation of the CDF table.
    ///
    /// Within flat stretches of the CDF the left end is returned.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.x[self.cdf.iter().position(|&c| c > 0.0).unwrap_or(1).saturating_sub(1)];
        }
        if p >= 1.0 {
            return self.grid.hi;
        }
        // First index with cdf ≥ p.
        let j = self.cdf.partition_point(|&c| c < p).max(1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let w = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.x[j - 1] + w * (self.x[j] - self.x[j - 1])
    }
}
