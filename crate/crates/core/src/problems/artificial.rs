//! The one-dimensional piecewise objective with a discontinuous stochastic
//! gradient and a `θ^30` super-linear part.
//!
//! ```text
//! U(θ,x) = a1 θ² 1{x≤θ} + a2 θ² 1{x>θ} + θ^30                    |θ| ≤ 1
//!        = (a3|θ|+a4) 1{x≤θ} + (a5|θ|+a6) 1{x>θ} + θ^30          |θ| > 1
//! ```
//! with `a3 = 2a1, a4 = −a1, a5 = 2a2, a6 = −a2`, so both branches agree at
//! `|θ| = 1`. The gradient splits as `F = 30θ^29` and a `G` that involves the
//! data density `f_X` evaluated at `θ`.

use crate::data::DataLaw;
use crate::error::{Error, Result};
use crate::oracle::{Exponents, GradientOracle};

/// The artificial problem for a data law with a bounded Lipschitz density.
#[derive(Debug, Clone)]
pub struct ArtificialProblem {
    pub a1: f64,
    pub a2: f64,
    law: DataLaw,
    c_x: f64,
    l_x: f64,
}

impl ArtificialProblem {
    /// Builds the problem. The law must be one-dimensional with a known
    /// density sup-bound and Lipschitz constant.
    pub fn new(a1: f64, a2: f64, law: DataLaw) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) {
            return Err(Error::NonFinite("artificial problem coefficients"));
        }
        let (c_x, l_x) = law.density_constants().ok_or_else(|| {
            Error::InvalidConfig(format!("data law {} has no bounded Lipschitz density", law.name()))
        })?;
        Ok(Self { a1, a2, law, c_x, l_x })
    }

    /// Derived coefficients `(a3, a4, a5, a6)`.
    pub fn tail_coefficients(&self) -> (f64, f64, f64, f64) {
        (2.0 * self.a1, -self.a1, 2.0 * self.a2, -self.a2)
    }

    /// Density sup-bound `c_X` and Lipschitz constant `L_X`.
    pub fn density_constants(&self) -> (f64, f64) {
        (self.c_x, self.l_x)
    }

    /// Lipschitz constant of `G`: `(4 + 5c_X + 2L_X)(1 + |a1| + |a2|)`.
    pub fn l_g(&self) -> f64 {
        (4.0 + 5.0 * self.c_x + 2.0 * self.l_x) * (1.0 + self.a1.abs() + self.a2.abs())
    }

    /// Growth constant of `G`: `(4 + 2c_X)(1 + |a1| + |a2|)`.
    pub fn k_g(&self) -> f64 {
        (4.0 + 2.0 * self.c_x) * (1.0 + self.a1.abs() + self.a2.abs())
    }

    fn f_x(&self, t: f64) -> f64 {
        self.law.density(t).expect("one-dimensional law")
    }

    /// Per-sample objective `U(θ, x)`.
    pub fn u_sample(&self, t: f64, x: f64) -> f64 {
        let below = x <= t;
        let p30 = t.powi(30);
        if t.abs() <= 1.0 {
            let a = if below { self.a1 } else { self.a2 };
            a * t * t + p30
        } else {
            let (a3, a4, a5, a6) = self.tail_coefficients();
            let lin = if below { a3 * t.abs() + a4 } else { a5 * t.abs() + a6 };
            lin + p30
        }
    }

    /// `F(θ, x) = 30 θ^29`.
    pub fn f(&self, t: f64) -> f64 {
        30.0 * t.powi(29)
    }

    /// `G(θ, x)` exactly as printed for the two branches.
    pub fn g(&self, t: f64, x: f64) -> f64 {
        let ind = if x <= t { 1.0 } else { 0.0 };
        let d = self.a1 - self.a2;
        if t.abs() <= 1.0 {
            2.0 * self.a2 * t + 2.0 * d * t * ind + d * t * t * self.f_x(t)
        } else {
            let sign = if t > 1.0 { 1.0 } else { -1.0 };
            2.0 * (self.a2 + d * ind) * sign + d * (2.0 * t.abs() - 1.0) * self.f_x(t)
        }
    }

    /// Expected objective `u(θ)` with `E[1{X≤θ}]` replaced by the CDF.
    pub fn u(&self, t: f64) -> Result<f64> {
        let cdf = self.law.cdf(t)?;
        let p30 = t.powi(30);
        if t.abs() <= 1.0 {
            Ok(p30 + self.a2 * t * t + (self.a1 - self.a2) * t * t * cdf)
        } else {
            let (a3, a4, a5, a6) = self.tail_coefficients();
            Ok(p30 + a5 * t.abs() + a6 + ((a3 - a5) * t.abs() + (a4 - a6)) * cdf)
        }
    }

    /// Derivative `u'(θ) = h(θ)`.
    pub fn u_prime(&self, t: f64) -> Result<f64> {
        let cdf = self.law.cdf(t)?;
        let f = self.f_x(t);
        let d = self.a1 - self.a2;
        if t.abs() <= 1.0 {
            Ok(30.0 * t.powi(29) + 2.0 * self.a2 * t + 2.0 * d * t * cdf + d * t * t * f)
        } else {
            let (a3, a4, a5, a6) = self.tail_coefficients();
            let sign = if t > 1.0 { 1.0 } else { -1.0 };
            Ok(30.0 * t.powi(29) + (a5 + (a3 - a5) * cdf) * sign + ((a3 - a5) * t.abs() + (a4 - a6)) * f)
        }
    }
}

impl GradientOracle for ArtificialProblem {
    fn dim_param(&self) -> usize {
        1
    }
    fn dim_data(&self) -> usize {
        1
    }
    fn exponents(&self) -> Exponents {
        Exponents { q: 3.0, r: 14.0, rho: 1.0 }
    }
    fn eval_u(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.u_sample(theta[0], x[0])
    }
    fn eval_f(&self, theta: &[f64], _x: &[f64], out: &mut [f64]) {
        out[0] = self.f(theta[0]);
    }
    fn eval_g(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        out[0] = self.g(theta[0], x[0]);
    }
    fn eval_h(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        out[0] = self.f(theta[0]) + self.g(theta[0], x[0]);
    }
    fn u_exact(&self, theta: &[f64]) -> Option<f64> {
        self.u(theta[0]).ok()
    }
    fn h_exact(&self, theta: &[f64]) -> Option<Vec<f64>> {
        self.u_prime(theta[0]).ok().map(|v| vec![v])
    }
    fn data_law(&self) -> &DataLaw {
        &self.law
    }
}
