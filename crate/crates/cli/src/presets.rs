//! Ready-made configurations of the published experiments.

use crate::config::{
    BoundsSpec, DatasetSpec, JobKind, LawSpec, ProblemSpec, RunConfig, ScheduleSpec, Subsample, SweepAxis, SweepSpec,
    TransferSpec, WassersteinSpec,
};
use std::path::Path;
use tusla::data::ColumnManifest;
use tusla::optimizers::{Decay, OptimizerConfig};
use tusla::problems::LossKind;

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 9] = [
    "simulation1",
    "simulation2",
    "bounds",
    "sde",
    "wasserstein",
    "concrete",
    "fashion-mnist",
    "fashion-mnist-beta-sweep",
    "transfer",
];

/// Looks up a preset; dataset presets read from `data_dir`.
pub fn by_name(name: &str, data_dir: &Path) -> Option<RunConfig> {
    Some(match name {
        "simulation1" => simulation1(),
        "simulation2" => simulation2(),
        "bounds" => bounds(),
        "sde" => sde(),
        "wasserstein" => wasserstein(),
        "concrete" => concrete(&data_dir.join("concrete.csv")),
        "fashion-mnist" => fashion_mnist(data_dir),
        "fashion-mnist-beta-sweep" => fashion_mnist_beta_sweep(data_dir),
        "transfer" => transfer(),
        _ => return None,
    })
}

fn schedule(seeds: Vec<u64>) -> ScheduleSpec {
    ScheduleSpec {
        steps: None,
        epochs: None,
        batch_size: 1,
        thinning: 1,
        seeds,
        deterministic: false,
        decay: None,
        allow_blow_up: false,
    }
}

fn base(job: JobKind, problem: Option<ProblemSpec>, schedule: ScheduleSpec) -> RunConfig {
    RunConfig {
        job,
        problem,
        optimizers: Vec::new(),
        theta0: None,
        schedule,
        output_dir: None,
        sweep: None,
        sde: None,
        bounds: None,
        wasserstein: None,
        transfer: None,
    }
}

fn artificial(law: LawSpec) -> Option<ProblemSpec> {
    Some(ProblemSpec::Artificial { a1: 2.0, a2: 1.0, law })
}

/// TUSLA, SGD, ADAM, AMSGrad and RMSProp on the artificial problem with
/// Beta(2,2) data from `θ0 = 4`; SGD is expected to blow up.
pub fn simulation1() -> RunConfig {
    simulation(LawSpec::Beta22, 4.0)
}

/// As [`simulation1`] with standard normal data from `θ0 = 5`.
pub fn simulation2() -> RunConfig {
    simulation(LawSpec::StdNormal, 5.0)
}

fn simulation(law: LawSpec, theta0: f64) -> RunConfig {
    let mut s = schedule(vec![1, 2, 3]);
    s.steps = Some(1000);
    s.allow_blow_up = true;
    let mut c = base(JobKind::Optimize, artificial(law), s);
    c.theta0 = Some(vec![theta0]);
    c.optimizers = vec![
        OptimizerConfig::Tusla { lambda: 1e-3, beta: 1e10, r: 14.0 },
        OptimizerConfig::Sgd { lr: 1e-3 },
        OptimizerConfig::adam(1e-3),
        OptimizerConfig::amsgrad(1e-3),
        OptimizerConfig::rmsprop(1e-2),
    ];
    c
}

/// Every constant of the artificial problem at `β = 10`, `θ0 = 4`.
pub fn bounds() -> RunConfig {
    let mut c = base(JobKind::Bounds, artificial(LawSpec::Beta22), schedule(vec![1]));
    c.theta0 = Some(vec![4.0]);
    c.bounds = Some(BoundsSpec { beta: 10.0, grid: None, n_values: vec![1, 1_000, 1_000_000, 1_000_000_000], lambda: None });
    c
}

/// The Langevin SDE of the artificial problem at `β = 10`.
pub fn sde() -> RunConfig {
    let mut c = base(JobKind::Sde, artificial(LawSpec::Beta22), schedule((1..=32).collect()));
    c.sde = Some(tusla::empirics::SdeConfig {
        lambda: 1.0,
        beta: 10.0,
        z0: vec![1.0],
        n_steps: 100_000,
        dt: 1e-5,
        thinning: 1000,
        deterministic: false,
    });
    c
}

/// TUSLA ensembles (512 seeds) at `λ̃_max` and `λ̃_max/4` against the Gibbs
/// target at `β = 10`, up to time `λ n = 4`.
pub fn wasserstein() -> RunConfig {
    let mut c = base(JobKind::Wasserstein, artificial(LawSpec::Beta22), schedule((1..=512).collect()));
    c.theta0 = Some(vec![4.0]);
    c.wasserstein = Some(WassersteinSpec {
        beta: 10.0,
        lambda_fractions: vec![1.0, 0.25],
        horizon: 4.0,
        checkpoints: 10,
        grid: None,
    });
    c
}

/// One-hidden-layer net (50 neurons) on the concrete compressive-strength data.
pub fn concrete(path: &Path) -> RunConfig {
    let mut s = schedule(vec![1, 2, 3]);
    s.epochs = Some(5000);
    s.batch_size = 256;
    let problem = ProblemSpec::Network {
        hidden: vec![50],
        loss: LossKind::Squared,
        eta: 0.0,
        r: 0.5,
        dataset: DatasetSpec::ConcreteCsv {
            path: path.to_path_buf(),
            manifest: ColumnManifest { expected_rows: Some(1030), ..Default::default() },
            test_fraction: 0.1,
            split_seed: 0,
        },
    };
    let mut c = base(JobKind::Optimize, Some(problem), s);
    c.optimizers = vec![
        OptimizerConfig::Tusla { lambda: 0.5, beta: 1e12, r: 0.5 },
        OptimizerConfig::adam(1e-2),
        OptimizerConfig::adam(1e-3),
    ];
    c
}

fn fashion_problem(dir: &Path) -> ProblemSpec {
    ProblemSpec::Network {
        hidden: vec![50],
        loss: LossKind::CrossEntropy,
        eta: 1e-5,
        r: 0.5,
        dataset: DatasetSpec::Idx {
            train_images: dir.join("train-images-idx3-ubyte"),
            train_labels: dir.join("train-labels-idx1-ubyte"),
            test_images: dir.join("t10k-images-idx3-ubyte"),
            test_labels: dir.join("t10k-labels-idx1-ubyte"),
            subsample: Some(Subsample { train: 6000, test: 1000, seed: 0 }),
        },
    }
}

/// Desk-scale Fashion-MNIST smoke run: 6k/1k stratified subsample, 50 epochs.
pub fn fashion_mnist(dir: &Path) -> RunConfig {
    let mut s = schedule(vec![1]);
    s.epochs = Some(50);
    s.batch_size = 128;
    let mut c = base(JobKind::Optimize, Some(fashion_problem(dir)), s);
    c.optimizers = vec![OptimizerConfig::Tusla { lambda: 0.5, beta: 1e12, r: 0.5 }];
    c
}

/// The β sweep of the sensitivity study on the subsample (200 epochs, decay
/// by 10 after epoch 150).
pub fn fashion_mnist_beta_sweep(dir: &Path) -> RunConfig {
    let mut c = fashion_mnist(dir);
    c.job = JobKind::Sweep;
    c.schedule.epochs = Some(200);
    c.schedule.decay = Some(Decay { at: 150, factor: 0.1, langevin: true });
    c.sweep = Some(SweepSpec { axis: SweepAxis::Beta, values: vec![1e4, 1e6, 1e8, 1e10, 1e12] });
    c
}

/// The two-stage transfer-learning pipeline, one sample per step.
pub fn transfer() -> RunConfig {
    let mut c = base(JobKind::Transfer, None, schedule(vec![1]));
    c.transfer = Some(TransferSpec {
        samples: 10_000,
        d1: 15,
        d2: 15,
        lambda: 0.5,
        eta: 1e-6,
        beta: 1e10,
        stage1_epochs: 30,
        stage2_epochs: 300,
        stage1_max_relative_mse: 0.1,
        grid_points: 21,
        data_seed: 0,
    });
    c
}
