//! Seed-parallel ensembles of optimiser runs that keep only checkpoint states.

use crate::error::{Error, Result};
use crate::optimizers::{apply_update, OptimizerConfig, OptimizerState};
use crate::oracle::{mean_gradient_into, norm, GradientOracle, ParamVector, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Runs `f(seed)` for every seed in parallel, preserving seed order.
pub fn par_seeds<T: Send>(seeds: &[u64], f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    seeds.par_iter().map(|&s| f(s)).collect()
}

/// States of many independent runs at common checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub seeds: Vec<u64>,
    /// Strictly increasing iteration indices.
    pub checkpoints: Vec<u64>,
    /// `states[c][s]` is `θ_{checkpoints[c]}` of seed `seeds[s]`.
    pub states: Vec<Vec<Vec<f64>>>,
    /// Per seed, the step at which the run became non-finite.
    pub blow_ups: Vec<Option<u64>>,
}

impl Ensemble {
    /// First coordinates at checkpoint `c` (the whole state when `d = 1`).
    pub fn first_coordinates(&self, c: usize) -> Vec<f64> {
        self.states[c].iter().map(|t| t[0]).collect()
    }

    /// Cross-seed mean of `|θ|^order` at every checkpoint.
    pub fn moment(&self, order: f64) -> Vec<(u64, f64)> {
        self.checkpoints
            .iter()
            .zip(&self.states)
            .map(|(&n, s)| (n, s.iter().map(|t| norm(t).powf(order)).sum::<f64>() / s.len() as f64))
            .collect()
    }
}

/// Runs `config` from `theta0` once per seed, streaming i.i.d. batches, and
/// stores the iterate at every checkpoint.
///
/// The random stream is consumed exactly as in [`crate::optimizers::run`]
/// (batch, then noise), so a checkpoint state equals the corresponding
/// recorded state of a single run with the same seed.
pub fn run_ensemble(
    config: &OptimizerConfig,
    oracle: &(dyn GradientOracle + Sync),
    theta0: &ParamVector,
    batch_size: usize,
    checkpoints: &[u64],
    seeds: &[u64],
) -> Result<Ensemble> {
    config.validate()?;
    if checkpoints.is_empty() || seeds.is_empty() || batch_size == 0 {
        return Err(Error::InvalidConfig("checkpoints, seeds and batch_size must be nonempty".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("checkpoints must be strictly increasing".into()));
    }
    if theta0.dim() != oracle.dim_param() {
        return Err(Error::DimensionMismatch {
            context: "ensemble initial parameter",
            expected: oracle.dim_param(),
            found: theta0.dim(),
        });
    }
    let per_seed = par_seeds(seeds, |seed| single(config, oracle, theta0, batch_size, checkpoints, seed));
    let mut states = vec![Vec::with_capacity(seeds.len()); checkpoints.len()];
    let mut blow_ups = Vec::with_capacity(seeds.len());
    for (snaps, blow) in per_seed {
        for (c, s) in snaps.into_iter().enumerate() {
            states[c].push(s);
        }
        blow_ups.push(blow);
    }
    Ok(Ensemble { seeds: seeds.to_vec(), checkpoints: checkpoints.to_vec(), states, blow_ups })
}

fn single(
    config: &OptimizerConfig,
    oracle: &dyn GradientOracle,
    theta0: &ParamVector,
    batch_size: usize,
    checkpoints: &[u64],
    seed: u64,
) -> (Vec<Vec<f64>>, Option<u64>) {
    let (d, m) = (oracle.dim_param(), oracle.dim_data());
    let law = oracle.data_law();
    let mut rng = RngStream::new(seed);
    let mut state = OptimizerState::new(theta0);
    let mut batch = vec![0.0; m * batch_size];
    let (mut h, mut scratch) = (vec![0.0; d], vec![0.0; d]);
    let mut snaps = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let mut k = 0u64;
    while next < checkpoints.len() && checkpoints[next] == 0 {
        snaps.push(state.theta.clone());
        next += 1;
    }
    while next < checkpoints.len() {
        for row in batch.chunks_exact_mut(m) {
            law.sample_into(&mut rng, row);
        }
        mean_gradient_into(oracle, &state.theta, &batch, &mut h, &mut scratch);
        apply_update(&mut state, &h, config, 1.0, Some(&mut rng));
        k += 1;
        if !state.is_finite() {
            while snaps.len() < checkpoints.len() {
                snaps.push(state.theta.clone());
            }
            return (snaps, Some(k));
        }
        if checkpoints[next] == k {
            snaps.push(state.theta.clone());
            next += 1;
        }
    }
    (snaps, None)
}
