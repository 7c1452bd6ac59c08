//! Numerical helpers: adaptive quadrature, log-domain arithmetic and exact
//! binomial coefficients.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::fmt;
use std::ops::{Div, Mul};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to tolerance `tol`
/// (absolute on the scale of the running estimate).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol * (left + right).abs().max(f64::MIN_POSITIVE) {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol, depth - 1) + step(f, m, b, fm, frm, fb, right, tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    // Seed with a uniform split so narrow features are not missed.
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let flo = f(lo);
            let fhi = f(hi);
            let fmid = f(0.5 * (lo + hi));
            let w = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            step(f, lo, hi, flo, fmid, fhi, w, tol, 40)
        })
        .sum()
}

/// `ln Σ exp(x_i)`, stable for large arguments. Empty input gives `−∞`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Exact binomial coefficient for `n ≤ 125` (fits `u128`), `None` beyond.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    if n > 125 {
        return None;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // Exact at every step: c · (n−i) is divisible by (i+1).
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    Some(c)
}

/// `ln C(n, k)`: exact for `n ≤ 125`, via `ln Γ` beyond.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    match binomial_exact(n, k) {
        Some(0) => f64::NEG_INFINITY,
        Some(c) => (c as f64).ln(),
        None => ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0),
    }
}

/// A strictly positive real stored by its natural logarithm.
///
/// Used for the bound constants, many of which overflow `f64` (binomials of
/// order 116, exponentials of `β L_R`). Zero is representable as `ln = −∞`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogVal {
    ln: f64,
}

impl LogVal {
    /// Zero.
    pub const ZERO: LogVal = LogVal { ln: f64::NEG_INFINITY };
    /// One.
    pub const ONE: LogVal = LogVal { ln: 0.0 };

    /// From a nonnegative `f64`.
    pub fn new(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogVal::new({x})");
        Self { ln: x.ln() }
    }

    /// From a natural logarithm.
    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    /// Natural logarithm.
    pub fn ln(self) -> f64 {
        self.ln
    }

    /// Base-10 logarithm.
    pub fn log10(self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Value as `f64`; may be `+∞` or `0` when out of range.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    /// Value as `f64` if it is finite and nonzero (or exactly zero).
    pub fn finite(self) -> Option<f64> {
        let v = self.value();
        if v.is_finite() && (v > 0.0 || self.ln == f64::NEG_INFINITY) {
            Some(v)
        } else {
            None
        }
    }

    /// `self^p`.
    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::ONE;
        }
        Self { ln: self.ln * p }
    }

    /// `√self`.
    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    /// `e^x` as a log value.
    pub fn exp(x: f64) -> Self {
        Self { ln: x }
    }

    /// `self + other`.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: LogVal) -> Self {
        let (hi, lo) = if self.ln >= other.ln { (self.ln, other.ln) } else { (other.ln, self.ln) };
        if hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self { ln: hi + (lo - hi).exp().ln_1p() }
    }

    /// `self − other`, `None` when the result would be negative.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: LogVal) -> Option<Self> {
        if other.ln > self.ln {
            return None;
        }
        if other.ln == f64::NEG_INFINITY {
            return Some(self);
        }
        let d = (other.ln - self.ln).exp();
        Some(Self { ln: self.ln + (-d).ln_1p() })
    }

    /// Sum of many terms.
    pub fn sum<I: IntoIterator<Item = LogVal>>(it: I) -> Self {
        let lns: Vec<f64> = it.into_iter().map(|v| v.ln).collect();
        Self { ln: log_sum_exp(&lns) }
    }

    /// Minimum.
    pub fn min(self, other: LogVal) -> Self {
        if self.ln <= other.ln { self } else { other }
    }

    /// Maximum.
    pub fn max(self, other: LogVal) -> Self {
        if self.ln >= other.ln { self } else { other }
    }

    /// Reciprocal.
    pub fn recip(self) -> Self {
        Self { ln: -self.ln }
    }
}

impl Mul for LogVal {
    type Output = LogVal;
    // Products add logarithms.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogVal) -> LogVal {
        LogVal { ln: self.ln + rhs.ln }
    }
}

impl Mul<f64> for LogVal {
    type Output = LogVal;
    fn mul(self, rhs: f64) -> LogVal {
        self * LogVal::new(rhs)
    }
}

impl Div for LogVal {
    type Output = LogVal;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogVal) -> LogVal {
        LogVal { ln: self.ln - rhs.ln }
    }
}

impl Div<f64> for LogVal {
    type Output = LogVal;
    fn div(self, rhs: f64) -> LogVal {
        self / LogVal::new(rhs)
    }
}

impl From<f64> for LogVal {
    fn from(x: f64) -> Self {
        LogVal::new(x)
    }
}

impl fmt::Debug for LogVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LogVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(v) => write!(f, "{v:e}"),
            None => write!(f, "10^{:.6}", self.log10()),
        }
    }
}

/// `ln ∫_0^T exp((s·α + γ)²) ds` for `α, γ ≥ 0`, evaluated without overflow.
///
/// The integrand is increasing, so it is rescaled by its value at `T` and
/// integrated in the variable `v = T − s`, where it decays like
/// `exp(−2(Tα+γ)α v)`. The interval is split geometrically towards `v = 0`
/// so the adaptive rule sees the peak at every scale.
pub fn ln_integral_exp_square(alpha: f64, gamma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let top = t * alpha + gamma;
    // w² − top² with w = top − vα, written without cancellation.
    let g = |v: f64| (-v * alpha * (2.0 * top - v * alpha)).exp();
    // Characteristic width of the peak near v = 0.
    let width = 1.0 / (2.0 * top * alpha).max(1.0 / t);
    let mut edges = vec![0.0];
    let mut e = width * 1e-3;
    while e < t {
        edges.push(e);
        e *= 4.0;
    }
    edges.push(t);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += adaptive_simpson(&g, w[0], w[1], 1e-12);
    }
    top * top + total.ln()
}
