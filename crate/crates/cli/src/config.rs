//! The JSON run configuration. Unknown keys are rejected everywhere.

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tusla::data::{ColumnManifest, DataLaw};
use tusla::empirics::{GridSpec, SdeConfig};
use tusla::optimizers::{Decay, OptimizerConfig};
use tusla::problems::LossKind;

/// What a configuration asks the runner to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    /// Train every listed optimiser on the problem, once per seed.
    Optimize,
    /// Vary one TUSLA hyperparameter over a list of values.
    Sweep,
    /// Simulate the Langevin SDE of the problem.
    Sde,
    /// Evaluate every theoretical constant and stepsize limit.
    Bounds,
    /// Measure W1/W2 and excess risk of TUSLA ensembles against the Gibbs target.
    Wasserstein,
    /// The two-stage transfer-learning pipeline.
    Transfer,
}

/// A complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub job: JobKind,
    /// Objective; not used by `transfer`.
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub optimizers: Vec<OptimizerConfig>,
    /// Initial parameter; networks default to Xavier initialisation.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    pub schedule: ScheduleSpec,
    /// Output directory; `--out` and the environment default take over when unset.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub sde: Option<SdeConfig>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub wasserstein: Option<WassersteinSpec>,
    #[serde(default)]
    pub transfer: Option<TransferSpec>,
}

/// One-dimensional data laws selectable from a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawSpec {
    Beta22,
    StdNormal,
    Uniform01,
}

impl LawSpec {
    pub fn law(self) -> DataLaw {
        match self {
            LawSpec::Beta22 => DataLaw::Beta22,
            LawSpec::StdNormal => DataLaw::StdNormal,
            LawSpec::Uniform01 => DataLaw::Uniform01,
        }
    }
}

/// The objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// The piecewise polynomial objective with streaming i.i.d. data.
    Artificial { a1: f64, a2: f64, law: LawSpec },
    /// A ReLU network trained in epochs on a dataset; one hidden width gives
    /// a one-hidden-layer net, two give a two-hidden-layer net.
    Network {
        hidden: Vec<usize>,
        loss: LossKind,
        eta: f64,
        /// Regulariser exponent: the penalty is `η/(2(r+1)) |θ|^{2(r+1)}`.
        r: f64,
        dataset: DatasetSpec,
    },
}

/// On-disk datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A numeric CSV with a header row, split and z-scored on the training rows.
    ConcreteCsv {
        path: PathBuf,
        #[serde(default)]
        manifest: ColumnManifest,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
        #[serde(default)]
        split_seed: u64,
    },
    /// IDX image/label pairs for training and test, optionally subsampled.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        #[serde(default)]
        subsample: Option<Subsample>,
    },
}

/// Stratified subsample sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub train: usize,
    pub test: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_test_fraction() -> f64 {
    0.1
}

fn one_usize() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

/// Step/epoch counts, batch size and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// Streaming steps (artificial problem).
    #[serde(default)]
    pub steps: Option<u64>,
    /// Passes over the training rows (network problems).
    #[serde(default)]
    pub epochs: Option<u64>,
    #[serde(default = "one_usize")]
    pub batch_size: usize,
    #[serde(default = "one_u64")]
    pub thinning: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub decay: Option<Decay>,
    /// Report non-finite iterates as data instead of failing with exit 4.
    #[serde(default)]
    pub allow_blow_up: bool,
}

/// Hyperparameter axes of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Beta,
    R,
    Lambda,
    Eta,
}

/// A one-axis sweep around the single TUSLA optimiser of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Bounds evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub beta: f64,
    /// Grid for the Gibbs-density quadrature; defaults to `[−3, 3]` with 2^20 nodes.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Steps at which to evaluate the W1/W2/excess-risk bounds.
    #[serde(default)]
    pub n_values: Vec<u64>,
    /// Stepsize for the bound evaluation; defaults to `λ̃_max`.
    #[serde(default)]
    pub lambda: Option<f64>,
}

/// Ensemble-versus-Gibbs measurement settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinSpec {
    pub beta: f64,
    /// TUSLA stepsizes as fractions of `λ̃_max`.
    pub lambda_fractions: Vec<f64>,
    /// Time horizon `λ n` of the longest run.
    pub horizon: f64,
    /// Number of log-spaced checkpoints.
    pub checkpoints: usize,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn transfer_samples() -> usize {
    10_000
}
fn transfer_width() -> usize {
    15
}
fn transfer_lambda() -> f64 {
    0.5
}
fn transfer_eta() -> f64 {
    1e-6
}
fn transfer_beta() -> f64 {
    1e10
}
fn transfer_grid() -> usize {
    21
}

/// Two-stage transfer pipeline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    #[serde(default = "transfer_samples")]
    pub samples: usize,
    #[serde(default = "transfer_width")]
    pub d1: usize,
    #[serde(default = "transfer_width")]
    pub d2: usize,
    #[serde(default = "transfer_lambda")]
    pub lambda: f64,
    #[serde(default = "transfer_eta")]
    pub eta: f64,
    #[serde(default = "transfer_beta")]
    pub beta: f64,
    pub stage1_epochs: u64,
    pub stage2_epochs: u64,
    /// Stage 1 aborts the pipeline when its final training MSE exceeds
    /// this fraction of the target variance.
    #[serde(default = "stage1_ratio")]
    pub stage1_max_relative_mse: f64,
    /// Points per axis of the (true, fitted) plot grid.
    #[serde(default = "transfer_grid")]
    pub grid_points: usize,
    /// Seed of the synthetic data sets.
    #[serde(default)]
    pub data_seed: u64,
}

fn stage1_ratio() -> f64 {
    0.1
}

impl RunConfig {
    /// Parses a config and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Cross-field checks that the schema cannot express.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let s = &self.schedule;
        if s.seeds.is_empty() {
            return bad("schedule.seeds must not be empty");
        }
        if s.batch_size == 0 || s.thinning == 0 {
            return bad("schedule.batch_size and schedule.thinning must be positive");
        }
        for o in &self.optimizers {
            o.validate()?;
        }
        let need_problem = self.job != JobKind::Transfer;
        if need_problem && self.problem.is_none() {
            return bad("this job needs a problem");
        }
        match &self.problem {
            Some(ProblemSpec::Artificial { .. }) => {
                if matches!(self.job, JobKind::Optimize | JobKind::Sweep) && s.steps.unwrap_or(0) == 0 {
                    return bad("the artificial problem needs schedule.steps > 0");
                }
                if let Some(t) = &self.theta0 {
                    if t.len() != 1 {
                        return bad("theta0 of the artificial problem must have one entry");
                    }
                }
            }
            Some(ProblemSpec::Network { hidden, eta, r, dataset, .. }) => {
                if !(1..=2).contains(&hidden.len()) || hidden.contains(&0) {
                    return bad("network.hidden must list one or two positive widths");
                }
                if !(*eta >= 0.0 && *r >= 0.0) {
                    return bad("network eta and r must be nonnegative");
                }
                if matches!(self.job, JobKind::Optimize | JobKind::Sweep) && s.epochs.unwrap_or(0) == 0 {
                    return bad("network problems need schedule.epochs > 0");
                }
                if let DatasetSpec::ConcreteCsv { test_fraction, .. } = dataset {
                    if !(0.0..1.0).contains(test_fraction) {
                        return bad("test_fraction must lie in [0, 1)");
                    }
                }
            }
            None => {}
        }
        let section = |present: bool, name: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!("job needs a '{name}' section")))
            }
        };
        match self.job {
            JobKind::Optimize => {
                if self.optimizers.is_empty() {
                    return bad("optimize needs at least one optimizer");
                }
            }
            JobKind::Sweep => {
                section(self.sweep.is_some(), "sweep")?;
                let sw = self.sweep.as_ref().expect("checked");
                if sw.values.is_empty() {
                    return bad("sweep.values must not be empty");
                }
                if self.optimizers.len() != 1 || !matches!(self.optimizers[0], OptimizerConfig::Tusla { .. }) {
                    return bad("sweep needs exactly one TUSLA optimizer");
                }
                if sw.axis == SweepAxis::Eta && !matches!(self.problem, Some(ProblemSpec::Network { .. })) {
                    return bad("an eta sweep needs a network problem");
                }
            }
            JobKind::Sde => {
                section(self.sde.is_some(), "sde")?;
                self.sde.as_ref().expect("checked").validate()?;
                self.require_artificial("sde")?;
            }
            JobKind::Bounds => {
                section(self.bounds.is_some(), "bounds")?;
                self.require_artificial("bounds")?;
                if self.bounds.as_ref().expect("checked").beta.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                    return bad("bounds.beta must be positive");
                }
            }
            JobKind::Wasserstein => {
                section(self.wasserstein.is_some(), "wasserstein")?;
                self.require_artificial("wasserstein")?;
                let w = self.wasserstein.as_ref().expect("checked");
                if w.lambda_fractions.is_empty() || w.lambda_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
                    return bad("wasserstein.lambda_fractions must be nonempty and lie in (0, 1]");
                }
                if !(w.beta > 0.0 && w.horizon > 0.0) || w.checkpoints == 0 {
                    return bad("wasserstein beta, horizon and checkpoints must be positive");
                }
            }
            JobKind::Transfer => {
                section(self.transfer.is_some(), "transfer")?;
                let t = self.transfer.as_ref().expect("checked");
                if t.samples < 2 || t.d1 == 0 || t.d2 == 0 || t.stage1_epochs == 0 || t.stage2_epochs == 0 || t.grid_points < 2 {
                    return bad("transfer sizes and epoch counts must be positive (samples and grid_points at least 2)");
                }
                if !(t.lambda > 0.0 && t.eta > 0.0 && t.beta > 0.0) {
                    return bad("transfer lambda, eta and beta must be positive");
                }
            }
        }
        Ok(())
    }

    fn require_artificial(&self, job: &str) -> Result<()> {
        match self.problem {
            Some(ProblemSpec::Artificial { .. }) => Ok(()),
            _ => Err(CliError::Config(format!("the {job} job supports the artificial problem only"))),
        }
    }

    /// Replaces the seed list (the `--seeds` override).
    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Result<Self> {
        self.schedule.seeds = seeds;
        self.validate()?;
        Ok(self)
    }
}
