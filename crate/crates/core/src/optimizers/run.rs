//! Trajectory drivers: streaming runs against a data law, and epoch-based
//! training over a finite dataset.

use super::{apply_update, OptimizerConfig, OptimizerState};
use crate::data::{shuffle, Dataset};
use crate::error::{Error, Result};
use crate::oracle::{mean_gradient_into, mean_objective, GradientOracle, ParamVector, RngStream};
use serde::{Deserialize, Serialize};

/// A single step-count-triggered stepsize multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decay {
    /// First step (or epoch, for [`train_epochs`]) at which the factor applies.
    pub at: u64,
    /// Multiplier applied from `at` onwards, e.g. `0.1`.
    pub factor: f64,
    /// Whether TUSLA/SGLD stepsizes are decayed as well as adaptive ones.
    #[serde(default = "default_true")]
    pub langevin: bool,
}

fn default_true() -> bool {
    true
}

impl Decay {
    fn multiplier(decay: Option<&Decay>, cfg: &OptimizerConfig, k: u64) -> f64 {
        match decay {
            Some(d) if k >= d.at => {
                let langevin = matches!(cfg, OptimizerConfig::Tusla { .. } | OptimizerConfig::Sgld { .. });
                if langevin && !d.langevin {
                    1.0
                } else {
                    d.factor
                }
            }
            _ => 1.0,
        }
    }
}

/// Streaming schedule for [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub n_steps: u64,
    pub batch_size: usize,
    /// Record every `thinning`-th iterate (`n = thinning, 2·thinning, …`).
    pub thinning: u64,
    pub seed: u64,
    /// Suppress the Langevin noise (test mode).
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub decay: Option<Decay>,
}

/// One recorded iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Iteration index `n` of `θ_n`.
    pub n: u64,
    pub theta: Vec<f64>,
    /// Batch mean of `U(θ_n, ·)` over the batch used for the update from `θ_n`.
    pub loss: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The iterate or its loss became non-finite at iteration `step`.
    BlowUp { step: u64 },
}

/// Recorded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub config: OptimizerConfig,
    pub schedule: Schedule,
    pub theta0: Vec<f64>,
    /// Strictly increasing in `n`; always ends with the final state.
    pub records: Vec<Record>,
    pub termination: Termination,
}

impl Trajectory {
    /// Final recorded iterate.
    pub fn final_theta(&self) -> &[f64] {
        &self.records.last().expect("a trajectory always records its final state").theta
    }

    /// Step at which the run blew up, if it did.
    pub fn blow_up_step(&self) -> Option<u64> {
        match self.termination {
            Termination::BlowUp { step } => Some(step),
            Termination::Completed => None,
        }
    }
}

/// Runs an optimiser for `schedule.n_steps` steps, drawing fresh i.i.d.
/// batches from the oracle's data law.
///
/// Per step the random stream is consumed in a fixed order: the batch
/// (row by row), then the Langevin noise. The loss of the final iterate is
/// evaluated on one extra batch drawn after the last update.
pub fn run(
    config: &OptimizerConfig,
    oracle: &dyn GradientOracle,
    theta0: &ParamVector,
    schedule: &Schedule,
) -> Result<Trajectory> {
    config.validate()?;
    if schedule.n_steps == 0 {
        return Err(Error::InvalidConfig("n_steps must be positive".into()));
    }
    if schedule.batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be positive".into()));
    }
    if schedule.thinning == 0 {
        return Err(Error::InvalidConfig("thinning must be positive".into()));
    }
    if theta0.dim() != oracle.dim_param() {
        return Err(Error::DimensionMismatch {
            context: "initial parameter",
            expected: oracle.dim_param(),
            found: theta0.dim(),
        });
    }
    let d = oracle.dim_param();
    let m = oracle.dim_data();
    let law = oracle.data_law();
    let mut rng = RngStream::new(schedule.seed);
    let mut state = OptimizerState::new(theta0);
    let mut batch = vec![0.0; m * schedule.batch_size];
    let (mut h, mut scratch) = (vec![0.0; d], vec![0.0; d]);
    let mut records = Vec::new();
    let mut termination = Termination::Completed;

    let draw = |rng: &mut RngStream, batch: &mut [f64]| {
        for row in batch.chunks_exact_mut(m) {
            law.sample_into(rng, row);
        }
    };

    for k in 0..schedule.n_steps {
        draw(&mut rng, &mut batch);
        if k > 0 && k % schedule.thinning == 0 {
            let loss = mean_objective(oracle, &state.theta, &batch);
            records.push(Record { n: k, theta: state.theta.clone(), loss });
            if !loss.is_finite() {
                termination = Termination::BlowUp { step: k };
                break;
            }
        }
        mean_gradient_into(oracle, &state.theta, &batch, &mut h, &mut scratch);
        let mult = Decay::multiplier(schedule.decay.as_ref(), config, k);
        let noise = if schedule.deterministic { None } else { Some(&mut rng) };
        apply_update(&mut state, &h, config, mult, noise);
        if !state.is_finite() {
            termination = Termination::BlowUp { step: k + 1 };
            records.push(Record { n: k + 1, theta: state.theta.clone(), loss: f64::NAN });
            break;
        }
    }
    if termination == Termination::Completed {
        draw(&mut rng, &mut batch);
        let loss = mean_objective(oracle, &state.theta, &batch);
        let n = schedule.n_steps;
        records.push(Record { n, theta: state.theta.clone(), loss });
        if !loss.is_finite() {
            termination = Termination::BlowUp { step: n };
        }
    }
    Ok(Trajectory {
        seed: schedule.seed,
        config: *config,
        schedule: *schedule,
        theta0: theta0.as_slice().to_vec(),
        records,
        termination,
    })
}

/// Epoch schedule for [`train_epochs`]: one epoch is a full pass over the
/// training rows in seeded shuffled mini-batches (the last batch may be short).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochSchedule {
    pub epochs: u64,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub decay: Option<Decay>,
}

/// Per-epoch summary produced by [`train_epochs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    /// Total optimiser steps taken so far.
    pub steps: u64,
    /// Mean of the batch losses seen during the epoch.
    pub train_loss: f64,
    /// Caller-supplied evaluation metrics (e.g. test MSE or accuracy).
    pub metrics: Vec<f64>,
}

/// Trains on the training rows of `dataset` for a number of epochs.
///
/// `evaluate(epoch, θ)` is called after every epoch and its metrics are
/// stored. Stops early with a blow-up status if `θ` becomes non-finite.
pub fn train_epochs(
    config: &OptimizerConfig,
    oracle: &dyn GradientOracle,
    dataset: &Dataset,
    theta0: &ParamVector,
    schedule: &EpochSchedule,
    mut evaluate: impl FnMut(u64, &[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, Vec<EpochRecord>, Termination)> {
    config.validate()?;
    if schedule.epochs == 0 || schedule.batch_size == 0 {
        return Err(Error::InvalidConfig("epochs and batch_size must be positive".into()));
    }
    if dataset.train_idx.is_empty() {
        return Err(Error::Empty("training rows"));
    }
    let d = oracle.dim_param();
    let m = oracle.dim_data();
    if m != dataset.m1 + dataset.m2 {
        return Err(Error::DimensionMismatch {
            context: "dataset row",
            expected: m,
            found: dataset.m1 + dataset.m2,
        });
    }
    let mut rng = RngStream::new(schedule.seed);
    let mut state = OptimizerState::new(theta0);
    let mut order = dataset.train_idx.clone();
    let (mut h, mut scratch) = (vec![0.0; d], vec![0.0; d]);
    let mut batch = Vec::with_capacity(m * schedule.batch_size);
    let mut history = Vec::new();
    for epoch in 1..=schedule.epochs {
        shuffle(&mut order, &mut rng);
        let mult = Decay::multiplier(schedule.decay.as_ref(), config, epoch - 1);
        let mut loss_sum = 0.0;
        let mut n_batches = 0usize;
        for chunk in order.chunks(schedule.batch_size) {
            batch.clear();
            batch.resize(m * chunk.len(), 0.0);
            for (row, &i) in batch.chunks_exact_mut(m).zip(chunk) {
                dataset.write_sample(i, row);
            }
            loss_sum += mean_objective(oracle, &state.theta, &batch);
            n_batches += 1;
            mean_gradient_into(oracle, &state.theta, &batch, &mut h, &mut scratch);
            apply_update(&mut state, &h, config, mult, Some(&mut rng));
            if !state.is_finite() {
                return Ok((state.theta, history, Termination::BlowUp { step: state.n }));
            }
        }
        let metrics = evaluate(epoch, &state.theta);
        history.push(EpochRecord {
            epoch,
            steps: state.n,
            train_loss: loss_sum / n_batches as f64,
            metrics,
        });
    }
    Ok((state.theta, history, Termination::Completed))
}
