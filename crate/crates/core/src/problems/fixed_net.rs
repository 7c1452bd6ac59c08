//! Single-hidden-layer ReLU network with a frozen input matrix `c`; only the
//! output weights `W1` and the hidden biases `b0` are trained.
//!
//! `𝔑^i(θ, z) = Σ_j W1^{ij} ReLU(⟨c^{j·}, z⟩ + b0^j)`, `θ = ([W1], b0)` with
//! `[W1]` flattened row-major (`W1^{ij}` at index `i·d1 + j`) followed by `b0`.
//! Data samples are laid out as `x = (y, z)`.

use crate::data::DataLaw;
use crate::error::{Error, Result};
use crate::oracle::{norm, Exponents, GradientOracle};

/// The fixed-input-weight network regression problem.
#[derive(Debug, Clone)]
pub struct FixedInputNet {
    pub d1: usize,
    pub m1: usize,
    pub m2: usize,
    /// Row-major `d1 × m1`.
    c: Vec<f64>,
    pub eta: f64,
    law: DataLaw,
}

impl FixedInputNet {
    /// Builds the network; every row of `c` must contain a nonzero entry.
    pub fn new(d1: usize, m1: usize, m2: usize, c: Vec<f64>, eta: f64, law: DataLaw) -> Result<Self> {
        if c.len() != d1 * m1 {
            return Err(Error::DimensionMismatch {
                context: "fixed input matrix",
                expected: d1 * m1,
                found: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fixed input matrix"));
        }
        if let Some(j) = (0..d1).find(|&j| c[j * m1..(j + 1) * m1].iter().all(|&v| v == 0.0)) {
            return Err(Error::InvalidConfig(format!("row {j} of the fixed input matrix is all zero")));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig(format!("regularisation eta must be positive, got {eta}")));
        }
        if law.dim() != m1 + m2 {
            return Err(Error::DimensionMismatch {
                context: "fixed net data law",
                expected: m1 + m2,
                found: law.dim(),
            });
        }
        Ok(Self { d1, m1, m2, c, eta, law })
    }

    /// Frobenius norm `c_F` of the fixed input matrix.
    pub fn c_frobenius(&self) -> f64 {
        norm(&self.c)
    }

    /// Parameter dimension `d1 (1 + m2)`.
    pub fn dim(&self) -> usize {
        self.d1 * (1 + self.m2)
    }

    /// Growth constant of `G`: `8 m2 d1² (1 + c_F)²`.
    pub fn k_g(&self) -> f64 {
        let cf = self.c_frobenius();
        8.0 * self.m2 as f64 * (self.d1 * self.d1) as f64 * (1.0 + cf) * (1.0 + cf)
    }

    fn pre_activations(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        let b0 = &theta[self.m2 * self.d1..];
        (0..self.d1)
            .map(|j| {
                let row = &self.c[j * self.m1..(j + 1) * self.m1];
                row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + b0[j]
            })
            .collect()
    }

    /// Network output `𝔑(θ, z) ∈ R^{m2}`.
    pub fn forward(&self, theta: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "fixed net parameter",
                expected: self.dim(),
                found: theta.len(),
            });
        }
        if z.len() != self.m1 {
            return Err(Error::DimensionMismatch {
                context: "fixed net input",
                expected: self.m1,
                found: z.len(),
            });
        }
        Ok(self.forward_unchecked(theta, z))
    }

    fn forward_unchecked(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        let hidden: Vec<f64> = self.pre_activations(theta, z).into_iter().map(|v| v.max(0.0)).collect();
        (0..self.m2)
            .map(|i| {
                let w = &theta[i * self.d1..(i + 1) * self.d1];
                w.iter().zip(&hidden).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn reg_exponent(&self) -> f64 {
        self.exponents().r
    }
}

impl GradientOracle for FixedInputNet {
    fn dim_param(&self) -> usize {
        self.dim()
    }
    fn dim_data(&self) -> usize {
        self.m1 + self.m2
    }
    fn exponents(&self) -> Exponents {
        Exponents { q: 4.0, r: 2.0, rho: 2.0 }
    }
    /// `|y − 𝔑(θ,z)|² + η/(2(r+1)) |θ|^{2(r+1)}`.
    fn eval_u(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (y, z) = x.split_at(self.m2);
        let out = self.forward_unchecked(theta, z);
        let r = self.reg_exponent();
        let fit: f64 = y.iter().zip(&out).map(|(a, b)| (a - b) * (a - b)).sum();
        fit + self.eta / (2.0 * (r + 1.0)) * norm(theta).powf(2.0 * (r + 1.0))
    }
    /// `F = η θ |θ|^{2r}`.
    fn eval_f(&self, theta: &[f64], _x: &[f64], out: &mut [f64]) {
        let s = self.eta * norm(theta).powf(2.0 * self.reg_exponent());
        for (o, t) in out.iter_mut().zip(theta) {
            *o = s * t;
        }
    }
    fn eval_g(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let (y, z) = x.split_at(self.m2);
        let pre = self.pre_activations(theta, z);
        let out_net = self.forward_unchecked(theta, z);
        let resid: Vec<f64> = y.iter().zip(&out_net).map(|(a, b)| a - b).collect();
        let d1 = self.d1;
        for i in 0..self.m2 {
            for j in 0..d1 {
                out[i * d1 + j] = -2.0 * resid[i] * pre[j].max(0.0);
            }
        }
        for j in 0..d1 {
            let active = if pre[j] >= 0.0 { 1.0 } else { 0.0 };
            let s: f64 = (0..self.m2).map(|i| resid[i] * theta[i * d1 + j]).sum();
            out[self.m2 * d1 + j] = -2.0 * s * active;
        }
    }
    fn eval_h(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let mut f = vec![0.0; out.len()];
        self.eval_f(theta, x, &mut f);
        self.eval_g(theta, x, out);
        for (o, fi) in out.iter_mut().zip(&f) {
            *o += fi;
        }
    }
    fn data_law(&self) -> &DataLaw {
        &self.law
    }
}
