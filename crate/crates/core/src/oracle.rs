//! Shared domain types: parameter and data vectors, the stochastic-gradient
//! oracle contract and the seeded random stream.
//!
//! An oracle exposes the per-sample objective `U(θ, x)` and the two parts of
//! its stochastic gradient `H = F + G`, where `F` carries the super-linear,
//! convex-at-infinity part and `G` the (possibly discontinuous) remainder.

use crate::data::DataLaw;
use crate::error::{Error, Result};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// A finite parameter vector `θ ∈ R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Builds a vector, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Error::NonFinite("parameter vector"))
        }
    }

    /// The zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Borrow the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Consume into the entries.
    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Self {
        p.0
    }
}

/// A finite data sample `x ∈ R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSample(Vec<f64>);

impl DataSample {
    /// Builds a sample, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Error::NonFinite("data sample"))
        }
    }

    /// Dimension `m`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Borrow the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean norm `|θ| = (Σ θ_i²)^{1/2}`.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Structural exponents of a problem: growth of `G` in θ (`q`), the taming
/// and growth exponent of `F` (`r`) and the growth in the data (`rho`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub q: f64,
    pub r: f64,
    pub rho: f64,
}

/// The stochastic-gradient oracle contract.
///
/// Implementations are immutable after construction and shareable across
/// threads. `eval_h` must equal `eval_f + eval_g` componentwise.
pub trait GradientOracle: Send + Sync {
    /// Parameter dimension `d`.
    fn dim_param(&self) -> usize;
    /// Data dimension `m`.
    fn dim_data(&self) -> usize;
    /// Structural exponents `(q, r, ρ)`.
    fn exponents(&self) -> Exponents;
    /// Per-sample objective `U(θ, x)`.
    fn eval_u(&self, theta: &[f64], x: &[f64]) -> f64;
    /// Super-linear part `F(θ, x)`, written into `out`.
    fn eval_f(&self, theta: &[f64], x: &[f64], out: &mut [f64]);
    /// Remainder `G(θ, x)`, written into `out`.
    fn eval_g(&self, theta: &[f64], x: &[f64], out: &mut [f64]);
    /// Full stochastic gradient `H = F + G`, written into `out`.
    fn eval_h(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let mut g = vec![0.0; out.len()];
        self.eval_f(theta, x, out);
        self.eval_g(theta, x, &mut g);
        for (o, gi) in out.iter_mut().zip(&g) {
            *o += gi;
        }
    }
    /// Analytic expected objective `u(θ)`, when known.
    fn u_exact(&self, _theta: &[f64]) -> Option<f64> {
        None
    }
    /// Analytic gradient `h(θ) = ∇u(θ)`, when known.
    fn h_exact(&self, _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// The law of the data stream.
    fn data_law(&self) -> &DataLaw;
}

/// Mean stochastic gradient over a mini-batch, `(1/|B|) Σ_x H(θ, x)`.
///
/// Summation runs left to right over the batch so results are reproducible
/// bit for bit.
pub fn stochastic_gradient(
    oracle: &dyn GradientOracle,
    theta: &ParamVector,
    batch: &[DataSample],
) -> Result<ParamVector> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let d = oracle.dim_param();
    if theta.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "stochastic_gradient parameter",
            expected: d,
            found: theta.dim(),
        });
    }
    let m = oracle.dim_data();
    let mut flat = Vec::with_capacity(batch.len() * m);
    for x in batch {
        if x.dim() != m {
            return Err(Error::DimensionMismatch {
                context: "stochastic_gradient sample",
                expected: m,
                found: x.dim(),
            });
        }
        flat.extend_from_slice(x.as_slice());
    }
    let mut out = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    mean_gradient_into(oracle, theta.as_slice(), &flat, &mut out, &mut scratch);
    ParamVector::new(out)
}

/// Allocation-free batch mean of `H` over `batch`, a row-major block of
/// samples of length `m` each. `scratch` must have length `d`.
pub fn mean_gradient_into(
    oracle: &dyn GradientOracle,
    theta: &[f64],
    batch: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) {
    let m = oracle.dim_data();
    let n = batch.len() / m.max(1);
    out.fill(0.0);
    for x in batch.chunks_exact(m) {
        oracle.eval_h(theta, x, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += *s;
        }
    }
    let inv = 1.0 / n as f64;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

/// Mean per-sample objective over a flat batch.
pub fn mean_objective(oracle: &dyn GradientOracle, theta: &[f64], batch: &[f64]) -> f64 {
    let m = oracle.dim_data();
    let n = batch.len() / m.max(1);
    batch.chunks_exact(m).map(|x| oracle.eval_u(theta, x)).sum::<f64>() / n as f64
}

/// Seeded random stream.
///
/// The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
/// from a `u64` through `SeedableRng::seed_from_u64`; its output is specified
/// independently of platform and word size. Gaussian variates use the
/// Ziggurat sampler of `rand_distr::StandardNormal`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    /// A fresh stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Fills `out` with independent standard normals.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.normal();
        }
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        // Lemire's multiply-shift; bias is below 2^-64 · n.
        ((self.inner.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
