//! Euler–Maruyama simulation of the time-changed Langevin SDE
//! `dZ = −λ h(Z) dt + √(2λ/β) dW`.

use crate::error::{Error, Result};
use crate::optimizers::Termination;
use crate::oracle::RngStream;
use serde::{Deserialize, Serialize};

/// Configuration of an Euler–Maruyama run. The drift is passed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    /// Time-change factor.
    pub lambda: f64,
    pub beta: f64,
    pub z0: Vec<f64>,
    pub n_steps: u64,
    /// Inner Euler step `Δt`.
    pub dt: f64,
    /// Record every `thinning`-th state.
    pub thinning: u64,
    /// Suppress the noise.
    #[serde(default)]
    pub deterministic: bool,
}

impl SdeConfig {
    /// Checks positivity of the step parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.dt > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidConfig("λ, Δt and β must be positive".into()));
        }
        if self.n_steps == 0 || self.thinning == 0 || self.z0.is_empty() {
            return Err(Error::InvalidConfig("n_steps, thinning and dim(z0) must be positive".into()));
        }
        if self.z0.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("SDE initial state"));
        }
        Ok(())
    }
}

/// One recorded SDE state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeRecord {
    pub k: u64,
    /// Physical time `k Δt`.
    pub t: f64,
    pub z: Vec<f64>,
}

/// Recorded SDE path; starts with `Z_0`, ends with the final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdePath {
    pub records: Vec<SdeRecord>,
    pub termination: Termination,
}

/// Simulates `Z_{k+1} = Z_k − λ h(Z_k) Δt + √(2λΔt/β) ξ_k`.
///
/// `drift(z, out)` writes `h(z)`. A non-finite state stops the run with a
/// blow-up status.
pub fn euler_maruyama(cfg: &SdeConfig, drift: &dyn Fn(&[f64], &mut [f64]), rng: &mut RngStream) -> Result<SdePath> {
    cfg.validate()?;
    let d = cfg.z0.len();
    let mut z = cfg.z0.clone();
    let mut h = vec![0.0; d];
    let scale = if cfg.deterministic { 0.0 } else { (2.0 * cfg.lambda * cfg.dt / cfg.beta).sqrt() };
    let mut records = vec![SdeRecord { k: 0, t: 0.0, z: z.clone() }];
    let mut termination = Termination::Completed;
    for k in 1..=cfg.n_steps {
        drift(&z, &mut h);
        for (zi, hi) in z.iter_mut().zip(&h) {
            *zi -= cfg.lambda * hi * cfg.dt;
        }
        if !cfg.deterministic {
            for zi in z.iter_mut() {
                *zi += scale * rng.normal();
            }
        }
        let finite = z.iter().all(|v| v.is_finite());
        if !finite || k % cfg.thinning == 0 || k == cfg.n_steps {
            records.push(SdeRecord { k, t: k as f64 * cfg.dt, z: z.clone() });
        }
        if !finite {
            termination = Termination::BlowUp { step: k };
            break;
        }
    }
    Ok(SdePath { records, termination })
}
