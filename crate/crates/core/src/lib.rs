//! Tamed unadjusted stochastic Langevin optimisation (TUSLA).
//!
//! * [`oracle`] — parameter/data vectors, the gradient-oracle trait and the
//!   seeded random stream.
//! * [`optimizers`] — TUSLA, SGLD, SGD, ADAM, AMSGrad and RMSProp with
//!   streaming and epoch drivers.
//! * [`problems`] — the piecewise artificial problem, the fixed-input-weight
//!   network and feed-forward networks with hand-written backpropagation.
//! * [`bounds`] — every explicit constant and stepsize limit of the theory,
//!   and the resulting W1/W2/excess-risk bounds.
//! * [`empirics`] — SDE simulation, Gibbs-density quadrature, 1-D
//!   Wasserstein distances, excess risk and moment tracking.
//! * [`data`] — synthetic laws, CSV/IDX loaders, splits and standardisation.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod data;
pub mod empirics;
pub mod error;
pub mod numeric;
pub mod optimizers;
pub mod oracle;
pub mod problems;

pub use error::{Error, Result};
pub use oracle::{DataSample, Exponents, GradientOracle, ParamVector, RngStream};
