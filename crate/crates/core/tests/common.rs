// Shared fixtures for the integration tests.
#![allow(dead_code)]

use tusla::data::DataLaw;
use tusla::problems::ArtificialProblem;
use tusla::{Exponents, GradientOracle};

/// The artificial problem with `a1 = 2`, `a2 = 1` and Beta(2,2) data.
pub fn artificial() -> ArtificialProblem {
    ArtificialProblem::new(2.0, 1.0, DataLaw::Beta22).unwrap()
}

/// Relative error with an absolute floor.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-8)
}

/// Oracle with `H ≡ 0` in dimension `d`.
pub struct ZeroOracle {
    pub d: usize,
    pub law: DataLaw,
}

impl ZeroOracle {
    pub fn new(d: usize) -> Self {
        Self { d, law: DataLaw::Uniform01 }
    }
}

impl GradientOracle for ZeroOracle {
    fn dim_param(&self) -> usize {
        self.d
    }
    fn dim_data(&self) -> usize {
        1
    }
    fn exponents(&self) -> Exponents {
        Exponents { q: 1.0, r: 0.5, rho: 1.0 }
    }
    fn eval_u(&self, _theta: &[f64], _x: &[f64]) -> f64 {
        0.0
    }
    fn eval_f(&self, _theta: &[f64], _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn eval_g(&self, _theta: &[f64], _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn data_law(&self) -> &DataLaw {
        &self.law
    }
}

/// Oracle with constant gradient `H ≡ c` in d = 1.
pub struct ConstOracle {
    pub c: f64,
    pub law: DataLaw,
}

impl GradientOracle for ConstOracle {
    fn dim_param(&self) -> usize {
        1
    }
    fn dim_data(&self) -> usize {
        1
    }
    fn exponents(&self) -> Exponents {
        Exponents { q: 1.0, r: 0.5, rho: 1.0 }
    }
    fn eval_u(&self, theta: &[f64], _x: &[f64]) -> f64 {
        self.c * theta[0]
    }
    fn eval_f(&self, _theta: &[f64], _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn eval_g(&self, _theta: &[f64], _x: &[f64], out: &mut [f64]) {
        out[0] = self.c;
    }
    fn data_law(&self) -> &DataLaw {
        &self.law
    }
}
