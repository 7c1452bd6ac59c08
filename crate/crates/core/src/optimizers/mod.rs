//! The tamed Langevin update and the baseline optimisers, with a uniform
//! stepping contract and trajectory recording.
//!
//! TUSLA:  `θ ← θ − λ H/(1 + √λ |θ|^{2r}) + √(2λ/β) ξ`
//! SGLD:   `θ ← θ − λ H + √(2λ/β) ξ`
//!
//! `ξ` is a standard Gaussian vector. Passing no RNG selects the
//! deterministic test mode in which `ξ = 0`.

mod run;

pub use run::{run, train_epochs, Decay, EpochRecord, EpochSchedule, Record, Schedule, Termination, Trajectory};

use crate::error::{Error, Result};
use crate::oracle::{mean_gradient_into, GradientOracle, ParamVector, RngStream};
use serde::{Deserialize, Serialize};

/// Hyperparameters of TUSLA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuslaConfig {
    /// Stepsize `λ > 0`.
    pub lambda: f64,
    /// Inverse temperature `β > 0`.
    pub beta: f64,
    /// Taming exponent `r ≥ 0`.
    pub r: f64,
}

/// Any supported optimiser with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerConfig {
    Tusla { lambda: f64, beta: f64, r: f64 },
    Sgld { lambda: f64, beta: f64 },
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Amsgrad { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Rmsprop { lr: f64, alpha: f64, eps: f64 },
}

impl OptimizerConfig {
    /// ADAM with `β1 = 0.9, β2 = 0.999, ε = 1e-8`.
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// AMSGrad with `β1 = 0.9, β2 = 0.999, ε = 1e-8`.
    pub fn amsgrad(lr: f64) -> Self {
        OptimizerConfig::Amsgrad { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// RMSProp with `α = 0.99, ε = 1e-8`.
    pub fn rmsprop(lr: f64) -> Self {
        OptimizerConfig::Rmsprop { lr, alpha: 0.99, eps: 1e-8 }
    }

    /// Short lower-case name.
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerConfig::Tusla { .. } => "tusla",
            OptimizerConfig::Sgld { .. } => "sgld",
            OptimizerConfig::Sgd { .. } => "sgd",
            OptimizerConfig::Adam { .. } => "adam",
            OptimizerConfig::Amsgrad { .. } => "amsgrad",
            OptimizerConfig::Rmsprop { .. } => "rmsprop",
        }
    }

    /// Checks the documented ranges.
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let unit = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in [0, 1), got {v}")))
            }
        };
        match *self {
            OptimizerConfig::Tusla { lambda, beta, r } => {
                pos("lambda", lambda)?;
                pos("beta", beta)?;
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::InvalidConfig(format!("r must be nonnegative, got {r}")));
                }
                Ok(())
            }
            OptimizerConfig::Sgld { lambda, beta } => {
                pos("lambda", lambda)?;
                pos("beta", beta)
            }
            OptimizerConfig::Sgd { lr } => pos("lr", lr),
            OptimizerConfig::Adam { lr, beta1, beta2, eps } | OptimizerConfig::Amsgrad { lr, beta1, beta2, eps } => {
                pos("lr", lr)?;
                unit("beta1", beta1)?;
                unit("beta2", beta2)?;
                pos("eps", eps)
            }
            OptimizerConfig::Rmsprop { lr, alpha, eps } => {
                pos("lr", lr)?;
                unit("alpha", alpha)?;
                pos("eps", eps)
            }
        }
    }
}

/// Mutable per-run optimiser state.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub theta: Vec<f64>,
    /// Number of completed steps.
    pub n: u64,
    /// First-moment accumulator (ADAM, AMSGrad).
    pub m: Vec<f64>,
    /// Second-moment accumulator (ADAM, AMSGrad, RMSProp).
    pub v: Vec<f64>,
    /// Running maximum of the bias-corrected second moment (AMSGrad).
    pub v_max: Vec<f64>,
}

impl OptimizerState {
    /// Fresh state at `θ0` with zeroed accumulators.
    pub fn new(theta0: &ParamVector) -> Self {
        let d = theta0.dim();
        Self {
            theta: theta0.as_slice().to_vec(),
            n: 0,
            m: vec![0.0; d],
            v: vec![0.0; d],
            v_max: vec![0.0; d],
        }
    }

    /// True when every coordinate of `θ` is finite.
    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }
}

/// Taming factor `1 / (1 + √λ |θ|^{2r})`.
#[inline]
pub fn taming_factor(theta: &[f64], lambda: f64, r: f64) -> f64 {
    let sq: f64 = theta.iter().map(|t| t * t).sum();
    // |θ|^{2r} = (|θ|²)^r, with an integer power when r is whole.
    let grow = if r.fract() == 0.0 && r <= i32::MAX as f64 { sq.powi(r as i32) } else { sq.powf(r) };
    1.0 / (1.0 + lambda.sqrt() * grow)
}

/// Tamed gradient `H / (1 + √λ |θ|^{2r})`.
pub fn tame(h: &ParamVector, theta: &ParamVector, lambda: f64, r: f64) -> ParamVector {
    let s = taming_factor(theta.as_slice(), lambda, r);
    ParamVector::new(h.as_slice().iter().map(|v| v * s).collect()).expect("scaling a finite vector by a factor in (0,1]")
}

fn add_noise(theta: &mut [f64], scale: f64, rng: Option<&mut RngStream>) {
    if let Some(rng) = rng {
        for t in theta.iter_mut() {
            *t += scale * rng.normal();
        }
    }
}

/// One TUSLA update from a precomputed stochastic gradient `h`.
pub fn tusla_update(state: &mut OptimizerState, h: &[f64], cfg: &TuslaConfig, lambda_mult: f64, rng: Option<&mut RngStream>) {
    let lambda = cfg.lambda * lambda_mult;
    let s = lambda * taming_factor(&state.theta, lambda, cfg.r);
    for (t, g) in state.theta.iter_mut().zip(h) {
        *t -= s * g;
    }
    add_noise(&mut state.theta, (2.0 * lambda / cfg.beta).sqrt(), rng);
    state.n += 1;
}

/// One SGLD update from a precomputed stochastic gradient `h`.
pub fn sgld_update(state: &mut OptimizerState, h: &[f64], lambda: f64, beta: f64, rng: Option<&mut RngStream>) {
    for (t, g) in state.theta.iter_mut().zip(h) {
        *t -= lambda * g;
    }
    add_noise(&mut state.theta, (2.0 * lambda / beta).sqrt(), rng);
    state.n += 1;
}

/// TUSLA step: evaluates the batch-mean gradient and applies the tamed update.
///
/// `batch` is a row-major block of samples; `rng = None` suppresses the noise.
pub fn tusla_step(
    state: &mut OptimizerState,
    oracle: &dyn GradientOracle,
    batch: &[f64],
    cfg: &TuslaConfig,
    rng: Option<&mut RngStream>,
) -> Result<()> {
    let d = state.theta.len();
    let (mut h, mut scratch) = (vec![0.0; d], vec![0.0; d]);
    mean_gradient_into(oracle, &state.theta, batch, &mut h, &mut scratch);
    tusla_update(state, &h, cfg, 1.0, rng);
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("tusla step"))
    }
}

/// SGLD step (untamed). A non-finite result is reported as an error; the
/// state is left holding the non-finite value.
pub fn sgld_step(
    state: &mut OptimizerState,
    oracle: &dyn GradientOracle,
    batch: &[f64],
    lambda: f64,
    beta: f64,
    rng: Option<&mut RngStream>,
) -> Result<()> {
    let d = state.theta.len();
    let (mut h, mut scratch) = (vec![0.0; d], vec![0.0; d]);
    mean_gradient_into(oracle, &state.theta, batch, &mut h, &mut scratch);
    sgld_update(state, &h, lambda, beta, rng);
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("sgld step"))
    }
}

/// One step of SGD, ADAM, AMSGrad or RMSProp with gradient `g`; `lr_mult`
/// scales the learning rate (used for decay schedules). Langevin configs are
/// rejected.
// The adaptive updates walk four parallel buffers by index.
#[allow(clippy::needless_range_loop)]
pub fn adaptive_step(state: &mut OptimizerState, g: &[f64], cfg: &OptimizerConfig, lr_mult: f64) -> Result<()> {
    state.n += 1;
    let t = state.n as i32;
    match *cfg {
        OptimizerConfig::Sgd { lr } => {
            let lr = lr * lr_mult;
            for (th, gi) in state.theta.iter_mut().zip(g) {
                *th -= lr * gi;
            }
        }
        OptimizerConfig::Adam { lr, beta1, beta2, eps } | OptimizerConfig::Amsgrad { lr, beta1, beta2, eps } => {
            let ams = matches!(cfg, OptimizerConfig::Amsgrad { .. });
            let lr = lr * lr_mult;
            let bc1 = 1.0 - beta1.powi(t);
            let bc2 = 1.0 - beta2.powi(t);
            for i in 0..state.theta.len() {
                let gi = g[i];
                state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * gi;
                state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = state.m[i] / bc1;
                let mut v_hat = state.v[i] / bc2;
                if ams {
                    state.v_max[i] = state.v_max[i].max(v_hat);
                    v_hat = state.v_max[i];
                }
                state.theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        OptimizerConfig::Rmsprop { lr, alpha, eps } => {
            let lr = lr * lr_mult;
            for i in 0..state.theta.len() {
                let gi = g[i];
                state.v[i] = alpha * state.v[i] + (1.0 - alpha) * gi * gi;
                state.theta[i] -= lr * gi / (state.v[i].sqrt() + eps);
            }
        }
        OptimizerConfig::Tusla { .. } | OptimizerConfig::Sgld { .. } => {
            state.n -= 1;
            return Err(Error::InvalidConfig(format!("{} is not an adaptive optimiser", cfg.name())));
        }
    }
    Ok(())
}

/// Applies one update of any optimiser from the stochastic gradient `h`.
/// `mult` scales the stepsize / learning rate.
pub fn apply_update(state: &mut OptimizerState, h: &[f64], cfg: &OptimizerConfig, mult: f64, rng: Option<&mut RngStream>) {
    match *cfg {
        OptimizerConfig::Tusla { lambda, beta, r } => tusla_update(state, h, &TuslaConfig { lambda, beta, r }, mult, rng),
        OptimizerConfig::Sgld { lambda, beta } => sgld_update(state, h, lambda * mult, beta, rng),
        _ => adaptive_step(state, h, cfg, mult).expect("adaptive configs are accepted"),
    }
}
