//! Job execution: each job writes a result bundle and returns its summary.
//!
//! Bundle layout: `config.json` (the effective configuration, which re-runs
//! the job exactly), data files (CSV), optional `bounds_report.json`, and
//! `summary.json`, written last with `"complete": true`.

use crate::config::{DatasetSpec, JobKind, ProblemSpec, RunConfig, SweepAxis};
use crate::error::{CliError, Result};
use crate::output::{BundleWriter, Stat};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use tusla::bounds::{
    evaluate_bound, theorem_constants, AssumptionConstants, BoundKind, BoundsReport, DerivedConstants, TargetMoments,
    TheoremConstants,
};
use tusla::data::{load_concrete_csv, load_idx, Dataset};
use tusla::empirics::{
    euler_maruyama, excess_risk, log_checkpoints, run_ensemble, target_density_1d, u_star_grid, wasserstein_1d,
    EmpiricalMeasure, GridSpec, Target, TargetDensity1D,
};
use tusla::optimizers::{run, train_epochs, EpochRecord, EpochSchedule, OptimizerConfig, Schedule, Termination};
use tusla::problems::{xavier_init, ArtificialProblem, FeedForwardNet, FixedInputNet, LossKind};
use tusla::{ParamVector, RngStream};

/// A written result bundle.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub summary: Value,
}

/// Runs any job into `out`.
pub fn run_job(cfg: &RunConfig, out: &Path) -> Result<Bundle> {
    cfg.validate()?;
    let w = BundleWriter::create(out)?;
    w.write_json("config.json", cfg)?;
    let (results, failure) = match cfg.job {
        JobKind::Optimize => optimize(cfg, &w)?,
        JobKind::Sweep => sweep(cfg, &w)?,
        JobKind::Sde => sde(cfg, &w)?,
        JobKind::Bounds => (bounds(cfg, &w)?, None),
        JobKind::Wasserstein => wasserstein(cfg, &w)?,
        JobKind::Transfer => transfer(cfg, &w)?,
    };
    let summary = json!({
        "job": cfg.job,
        "complete": failure.is_none(),
        "failure": failure.as_ref().map(|e| e.report()),
        "config": cfg,
        "results": results,
    });
    w.write_json("summary.json", &summary)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(Bundle { dir: out.to_path_buf(), summary }),
    }
}

/// Results plus an optional failure that still leaves a written bundle.
type JobOutput = (Value, Option<CliError>);

fn artificial(cfg: &RunConfig) -> Result<ArtificialProblem> {
    match &cfg.problem {
        Some(ProblemSpec::Artificial { a1, a2, law }) => Ok(ArtificialProblem::new(*a1, *a2, law.law())?),
        _ => Err(CliError::Config("expected the artificial problem".into())),
    }
}

fn theta0_artificial(cfg: &RunConfig) -> Result<ParamVector> {
    let t = cfg
        .theta0
        .clone()
        .ok_or_else(|| CliError::Config("the artificial problem needs theta0".into()))?;
    Ok(ParamVector::new(t)?)
}

fn blow_up_error(what: &str, steps: &[(u64, Option<u64>)]) -> Option<CliError> {
    steps
        .iter()
        .find_map(|(seed, s)| s.map(|k| CliError::BlowUp(format!("{what}: seed {seed} became non-finite at step {k}"))))
}

fn trajectory_header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = ["n", "loss", "theta_norm"].iter().map(|s| s.to_string()).collect();
    h.extend((0..d).map(|i| format!("theta_{i}")));
    h
}

/// Name of the per-seed trajectory file of optimiser `i`.
pub fn trajectory_file(i: usize, opt: &OptimizerConfig, seed: u64) -> String {
    format!("trajectories/{i}_{}_seed{seed}.csv", opt.name())
}

// ---------------------------------------------------------------- optimize

/// Per-optimiser summary of a streaming run.
#[derive(Debug, Clone, Serialize)]
pub struct StreamSummary {
    pub optimizer: OptimizerConfig,
    pub seeds: Vec<u64>,
    pub final_loss: Stat,
    pub final_theta_norm: Stat,
    /// Per seed, the step at which the iterate became non-finite.
    pub blow_up_steps: Vec<Option<u64>>,
    /// Per seed, the first recorded step with `|θ| ≤ 0.1`.
    pub first_within_0_1: Vec<Option<u64>>,
}

/// Per-optimiser summary of an epoch run.
#[derive(Debug, Clone, Serialize)]
pub struct EpochSummary {
    pub optimizer: OptimizerConfig,
    pub seeds: Vec<u64>,
    /// `test_mse` or `test_accuracy`.
    pub metric: &'static str,
    pub final_metric: Stat,
    pub final_train_loss: Stat,
    /// Per seed, the epoch with the best metric.
    pub best_epoch: Vec<Option<u64>>,
    pub blow_up_steps: Vec<Option<u64>>,
}

fn optimize(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    match cfg.problem {
        Some(ProblemSpec::Artificial { .. }) => optimize_stream(cfg, w),
        Some(ProblemSpec::Network { .. }) => optimize_epochs(cfg, w),
        None => Err(CliError::Config("optimize needs a problem".into())),
    }
}

fn optimize_stream(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let problem = artificial(cfg)?;
    let theta0 = theta0_artificial(cfg)?;
    let s = &cfg.schedule;
    let mut summaries = Vec::new();
    let mut failure = None;
    for (i, opt) in cfg.optimizers.iter().enumerate() {
        let runs = s
            .seeds
            .par_iter()
            .map(|&seed| {
                let schedule = Schedule {
                    n_steps: s.steps.unwrap_or(0),
                    batch_size: s.batch_size,
                    thinning: s.thinning,
                    seed,
                    deterministic: s.deterministic,
                    decay: s.decay,
                };
                run(opt, &problem, &theta0, &schedule)
            })
            .collect::<tusla::Result<Vec<_>>>()?;
        let mut final_loss = Vec::new();
        let mut final_norm = Vec::new();
        let mut blow = Vec::new();
        let mut hit = Vec::new();
        for t in &runs {
            let rows: Vec<Vec<f64>> = t
                .records
                .iter()
                .map(|r| {
                    let mut row = vec![r.n as f64, r.loss, tusla::oracle::norm(&r.theta)];
                    row.extend_from_slice(&r.theta);
                    row
                })
                .collect();
            w.write_csv(&trajectory_file(i, opt, t.seed), &trajectory_header(theta0.dim()), &rows)?;
            let last = t.records.last().expect("runs record their final state");
            final_loss.push(last.loss);
            final_norm.push(tusla::oracle::norm(&last.theta));
            blow.push(t.blow_up_step());
            hit.push(t.records.iter().find(|r| tusla::oracle::norm(&r.theta) <= 0.1).map(|r| r.n));
        }
        if !s.allow_blow_up && failure.is_none() {
            let pairs: Vec<_> = s.seeds.iter().copied().zip(blow.iter().copied()).collect();
            failure = blow_up_error(opt.name(), &pairs);
        }
        summaries.push(StreamSummary {
            optimizer: *opt,
            seeds: s.seeds.clone(),
            final_loss: Stat::of(&final_loss),
            final_theta_norm: Stat::of(&final_norm),
            blow_up_steps: blow,
            first_within_0_1: hit,
        });
    }
    Ok((json!({ "mode": "stream", "optimizers": summaries }), failure))
}

/// Training data, evaluation rows and the network built on them.
pub struct NetworkTask {
    pub net: FeedForwardNet,
    pub train: Dataset,
    /// Evaluation set and the rows of it to use.
    pub eval: Dataset,
    pub eval_rows: Vec<usize>,
}

/// Loads the dataset of a network problem and builds the network.
pub fn network_task(spec: &ProblemSpec, eta_override: Option<f64>) -> Result<NetworkTask> {
    let ProblemSpec::Network { hidden, loss, eta, r, dataset } = spec else {
        return Err(CliError::Config("expected a network problem".into()));
    };
    let eta = eta_override.unwrap_or(*eta);
    let (train, eval, eval_rows) = match dataset {
        DatasetSpec::ConcreteCsv { path, manifest, test_fraction, split_seed } => {
            let ds = load_concrete_csv(path, manifest, *split_seed, *test_fraction)?;
            let rows = if ds.test_idx.is_empty() { ds.train_idx.clone() } else { ds.test_idx.clone() };
            (ds.clone(), ds, rows)
        }
        DatasetSpec::Idx { train_images, train_labels, test_images, test_labels, subsample } => {
            let mut train = load_idx(train_images, train_labels)?;
            let mut test = load_idx(test_images, test_labels)?;
            if let Some(sub) = subsample {
                train = train.stratified_subsample(sub.train, sub.seed);
                test = test.stratified_subsample(sub.test, sub.seed.wrapping_add(1));
            }
            let rows = (0..test.len()).collect();
            (train, test, rows)
        }
    };
    let law = train.train_law();
    let (m1, m2) = (train.m1, train.m2);
    let net = match hidden.as_slice() {
        [d1] => FeedForwardNet::one_layer(m1, *d1, m2, *loss, eta, *r, law)?,
        [d1, d2] => FeedForwardNet::two_layer(m1, *d1, *d2, m2, *loss, eta, *r, law)?,
        _ => return Err(CliError::Config("network.hidden must list one or two widths".into())),
    };
    Ok(NetworkTask { net, train, eval, eval_rows })
}

impl NetworkTask {
    /// Test MSE (squared loss) or accuracy (cross-entropy) at `θ`.
    pub fn metric(&self, theta: &[f64]) -> f64 {
        let rows = &self.eval_rows;
        match self.net.loss {
            LossKind::Squared => {
                rows.iter().map(|&i| self.net.data_loss(theta, self.eval.y(i), self.eval.z(i))).sum::<f64>() / rows.len() as f64
            }
            LossKind::CrossEntropy => {
                let hits = rows
                    .iter()
                    .filter(|&&i| argmax(&self.net.forward(theta, self.eval.z(i))) == argmax(self.eval.y(i)))
                    .count();
                hits as f64 / rows.len() as f64
            }
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self.net.loss {
            LossKind::Squared => "test_mse",
            LossKind::CrossEntropy => "test_accuracy",
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.net.loss {
            LossKind::Squared => a < b,
            LossKind::CrossEntropy => a > b,
        }
    }

    /// Trains one seed; `θ0` is Xavier-initialised from the seed unless given.
    pub fn train(
        &self,
        opt: &OptimizerConfig,
        cfg: &RunConfig,
        seed: u64,
    ) -> Result<(Vec<f64>, Vec<EpochRecord>, Termination)> {
        let theta0 = match &cfg.theta0 {
            Some(t) => ParamVector::new(t.clone())?,
            None => xavier_init(&self.net, &mut RngStream::new(seed)),
        };
        let schedule = EpochSchedule {
            epochs: cfg.schedule.epochs.unwrap_or(0),
            batch_size: cfg.schedule.batch_size,
            seed,
            decay: cfg.schedule.decay,
        };
        Ok(train_epochs(opt, &self.net, &self.train, &theta0, &schedule, |_, th| vec![self.metric(th)])?)
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// Columns of an epoch-run CSV.
pub const EPOCH_HEADER: [&str; 4] = ["epoch", "steps", "train_loss", "metric"];

fn epoch_rows(history: &[EpochRecord]) -> Vec<Vec<f64>> {
    history
        .iter()
        .map(|r| vec![r.epoch as f64, r.steps as f64, r.train_loss, r.metrics[0]])
        .collect()
}

fn optimize_epochs(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let task = network_task(cfg.problem.as_ref().expect("validated"), None)?;
    optimize_epochs_with(cfg, w, &task)
}

fn optimize_epochs_with(cfg: &RunConfig, w: &BundleWriter, task: &NetworkTask) -> Result<JobOutput> {
    let s = &cfg.schedule;
    let header: Vec<String> = EPOCH_HEADER.iter().map(|h| h.to_string()).collect();
    let mut summaries = Vec::new();
    let mut failure = None;
    for (i, opt) in cfg.optimizers.iter().enumerate() {
        let runs = s
            .seeds
            .par_iter()
            .map(|&seed| task.train(opt, cfg, seed))
            .collect::<Result<Vec<_>>>()?;
        let mut final_metric = Vec::new();
        let mut final_train = Vec::new();
        let mut best = Vec::new();
        let mut blow = Vec::new();
        for (&seed, (_, history, term)) in s.seeds.iter().zip(&runs) {
            w.write_csv(&trajectory_file(i, opt, seed), &header, &epoch_rows(history))?;
            let blown = match term {
                Termination::BlowUp { step } => Some(*step),
                Termination::Completed => None,
            };
            blow.push(blown);
            let last = history.last();
            final_metric.push(if blown.is_some() { f64::NAN } else { last.map_or(f64::NAN, |r| r.metrics[0]) });
            final_train.push(if blown.is_some() { f64::NAN } else { last.map_or(f64::NAN, |r| r.train_loss) });
            best.push(
                history
                    .iter()
                    .filter(|r| r.metrics[0].is_finite())
                    .fold(None::<&EpochRecord>, |b, r| match b {
                        Some(b) if !task.better(r.metrics[0], b.metrics[0]) => Some(b),
                        _ => Some(r),
                    })
                    .map(|r| r.epoch),
            );
        }
        if !s.allow_blow_up && failure.is_none() {
            let pairs: Vec<_> = s.seeds.iter().copied().zip(blow.iter().copied()).collect();
            failure = blow_up_error(opt.name(), &pairs);
        }
        summaries.push(EpochSummary {
            optimizer: *opt,
            seeds: s.seeds.clone(),
            metric: task.metric_name(),
            final_metric: Stat::of(&final_metric),
            final_train_loss: Stat::of(&final_train),
            best_epoch: best,
            blow_up_steps: blow,
        });
    }
    Ok((
        json!({ "mode": "epochs", "provenance": task.train.provenance, "optimizers": summaries }),
        failure,
    ))
}

// ---------------------------------------------------------------- sweep

/// The configuration of one sweep cell: the TUSLA optimiser (or the network
/// `η`) with the swept value substituted.
pub fn sweep_cell(cfg: &RunConfig, axis: SweepAxis, value: f64) -> RunConfig {
    let mut cell = cfg.clone();
    cell.job = JobKind::Optimize;
    cell.sweep = None;
    if let OptimizerConfig::Tusla { lambda, beta, r } = &mut cell.optimizers[0] {
        match axis {
            SweepAxis::Beta => *beta = value,
            SweepAxis::R => *r = value,
            SweepAxis::Lambda => *lambda = value,
            SweepAxis::Eta => {}
        }
    }
    if axis == SweepAxis::Eta {
        if let Some(ProblemSpec::Network { eta, .. }) = &mut cell.problem {
            *eta = value;
        }
    }
    cell
}

fn sweep(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let sw = cfg.sweep.as_ref().expect("validated");
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut failure = None;
    for (k, &value) in sw.values.iter().enumerate() {
        let cell = sweep_cell(cfg, sw.axis, value);
        let cw = w.child(&format!("cell_{k}"))?;
        cw.write_json("config.json", &cell)?;
        let (res, fail) = optimize(&cell, &cw)?;
        let cell_summary = json!({
            "job": JobKind::Optimize,
            "complete": fail.is_none(),
            "failure": fail.as_ref().map(|e| e.report()),
            "config": cell,
            "results": res,
        });
        cw.write_json("summary.json", &cell_summary)?;
        let first = &res["optimizers"][0];
        let (metric, stat) = if res["mode"] == "epochs" {
            (first["metric"].as_str().unwrap_or("metric").to_string(), &first["final_metric"])
        } else {
            ("final_loss".to_string(), &first["final_loss"])
        };
        let blow_ups = first["blow_up_steps"].as_array().map_or(0, |a| a.iter().filter(|v| !v.is_null()).count());
        rows.push(vec![
            format!("{value:e}"),
            metric,
            num_text(&stat["mean"]),
            num_text(&stat["std"]),
            blow_ups.to_string(),
        ]);
        cells.push(json!({ "value": value, "dir": format!("cell_{k}"), "metric": stat, "blow_ups": blow_ups }));
        if failure.is_none() {
            failure = fail;
        }
    }
    w.write_text_csv("sweep_table.csv", &["value", "metric", "mean", "std", "blow_ups"], &rows)?;
    Ok((json!({ "axis": sw.axis, "cells": cells }), failure))
}

fn num_text(v: &Value) -> String {
    v.as_f64().map_or("NaN".to_string(), |x| x.to_string())
}

// ---------------------------------------------------------------- sde

fn sde(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let problem = artificial(cfg)?;
    let sc = cfg.sde.as_ref().expect("validated");
    let drift = |z: &[f64], out: &mut [f64]| {
        out[0] = problem.u_prime(z[0]).unwrap_or(f64::NAN);
    };
    let paths = cfg
        .schedule
        .seeds
        .par_iter()
        .map(|&seed| euler_maruyama(sc, &drift, &mut RngStream::new(seed)))
        .collect::<tusla::Result<Vec<_>>>()?;
    let mut finals = Vec::new();
    let mut blow = Vec::new();
    let header = vec!["k".to_string(), "t".to_string(), "z_0".to_string()];
    for (&seed, p) in cfg.schedule.seeds.iter().zip(&paths) {
        let rows: Vec<Vec<f64>> = p.records.iter().map(|r| vec![r.k as f64, r.t, r.z[0]]).collect();
        w.write_csv(&format!("sde/seed{seed}.csv"), &header, &rows)?;
        finals.push(p.records.last().map_or(f64::NAN, |r| r.z[0]));
        blow.push((seed, p.termination_step()));
    }
    let failure = if cfg.schedule.allow_blow_up { None } else { blow_up_error("sde", &blow) };
    let second: Vec<f64> = finals.iter().map(|z| z * z).collect();
    Ok((
        json!({
            "final_z": Stat::of(&finals),
            "final_second_moment": Stat::of(&second),
            "blow_up_steps": blow.iter().map(|b| b.1).collect::<Vec<_>>(),
        }),
        failure,
    ))
}

trait TerminationStep {
    fn termination_step(&self) -> Option<u64>;
}

impl TerminationStep for tusla::empirics::SdePath {
    fn termination_step(&self) -> Option<u64> {
        match self.termination {
            Termination::BlowUp { step } => Some(step),
            Termination::Completed => None,
        }
    }
}

// ---------------------------------------------------------------- bounds

/// Default quadrature grid for the artificial problem's Gibbs density.
pub fn default_grid() -> GridSpec {
    GridSpec { lo: -3.0, hi: 3.0, points: (1 << 20) + 1 }
}

/// Everything needed to compare runs with the theory on the artificial problem.
pub struct TheoryContext {
    pub ac: AssumptionConstants,
    pub dc: DerivedConstants,
    pub tc: TheoremConstants,
    pub density: TargetDensity1D,
    pub u_star: f64,
}

/// Constants, theorem constants and the quadrature target at inverse temperature `β`.
pub fn theory_context(problem: &ArtificialProblem, beta: f64, theta0_norm: f64, grid: GridSpec) -> Result<TheoryContext> {
    let ac = AssumptionConstants::artificial(problem, beta, theta0_norm);
    let dc = DerivedConstants::compute(&ac)?;
    let u = |t: f64| problem.u(t).unwrap_or(f64::INFINITY);
    let mut density = target_density_1d(&u, beta, grid)?;
    let k = 4.0 * ac.r + 2.0;
    density.cache_moment(k);
    let target = TargetMoments { v2_integral: 1.0 + density.abs_moment(2.0), abs_moment_4r2: density.abs_moment(k) };
    let tc = theorem_constants(&ac, &dc, Some(&target))?;
    let (u_star, _) = u_star_grid(&u, &grid);
    Ok(TheoryContext { ac, dc, tc, density, u_star })
}

fn bounds(cfg: &RunConfig, w: &BundleWriter) -> Result<Value> {
    let problem = artificial(cfg)?;
    let spec = cfg.bounds.as_ref().expect("validated");
    let theta0_norm = cfg.theta0.as_ref().map_or(0.0, |t| tusla::oracle::norm(t));
    let ctx = theory_context(&problem, spec.beta, theta0_norm, spec.grid.unwrap_or_else(default_grid))?;
    let report = BoundsReport::new(&ctx.ac, &ctx.dc, Some(&ctx.tc));
    w.write_json("bounds_report.json", &report)?;
    let lambda = spec.lambda.unwrap_or(ctx.dc.lambda_max_relaxed);
    let rows: Vec<Vec<f64>> = spec
        .n_values
        .iter()
        .map(|&n| {
            let b = |k| evaluate_bound(k, n, lambda, &ctx.ac, &ctx.tc).log10();
            vec![n as f64, lambda, b(BoundKind::W1), b(BoundKind::W2), b(BoundKind::ExcessRisk)]
        })
        .collect();
    if !rows.is_empty() {
        let header = ["n", "lambda", "w1_bound_log10", "w2_bound_log10", "excess_risk_bound_log10"].map(String::from);
        w.write_csv("bounds_table.csv", &header, &rows)?;
    }
    Ok(json!({
        "lambda_max_relaxed": ctx.dc.lambda_max_relaxed,
        "lambda_max_log10": ctx.dc.lambda_max.log10(),
        "target_second_moment": ctx.density.abs_moment(2.0),
        "entries": report.entries.len(),
        "warnings": report.warnings,
    }))
}

// ---------------------------------------------------------------- wasserstein

/// Columns of a Wasserstein table.
pub const WASSERSTEIN_HEADER: [&str; 10] = [
    "n",
    "t",
    "lambda",
    "w1",
    "w2",
    "excess_risk",
    "second_moment",
    "w1_bound_log10",
    "w2_bound_log10",
    "excess_risk_bound_log10",
];

/// One row of a Wasserstein table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WassersteinRow {
    pub n: u64,
    pub t: f64,
    pub lambda: f64,
    pub w1: f64,
    pub w2: f64,
    pub excess_risk: f64,
    pub second_moment: f64,
    pub w1_bound_log10: f64,
    pub w2_bound_log10: f64,
    pub excess_risk_bound_log10: f64,
}

impl WassersteinRow {
    fn values(&self) -> Vec<f64> {
        vec![
            self.n as f64,
            self.t,
            self.lambda,
            self.w1,
            self.w2,
            self.excess_risk,
            self.second_moment,
            self.w1_bound_log10,
            self.w2_bound_log10,
            self.excess_risk_bound_log10,
        ]
    }
}

/// Checkpoints of the largest stepsize, scaled so every stepsize is measured
/// at the same times `t = λ n`.
pub fn scaled_checkpoints(horizon: f64, lambda_ref: f64, lambda: f64, count: usize) -> Vec<u64> {
    let last = (horizon / lambda_ref).ceil() as u64;
    let ratio = lambda_ref / lambda;
    let mut c: Vec<u64> = log_checkpoints(1, last.max(1), count)
        .into_iter()
        .map(|n| (n as f64 * ratio).round() as u64)
        .collect();
    c.dedup();
    c
}

fn wasserstein(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let problem = artificial(cfg)?;
    let spec = cfg.wasserstein.as_ref().expect("validated");
    let theta0 = theta0_artificial(cfg)?;
    let ctx = theory_context(&problem, spec.beta, theta0.norm(), spec.grid.unwrap_or_else(default_grid))?;
    let lambda_tilde = ctx.dc.lambda_max_relaxed;
    let f_max = spec.lambda_fractions.iter().cloned().fold(0.0, f64::max);
    let mut tables = Vec::new();
    let mut failure = None;
    for (i, &f) in spec.lambda_fractions.iter().enumerate() {
        let lambda = f * lambda_tilde;
        let checkpoints = scaled_checkpoints(spec.horizon, f_max * lambda_tilde, lambda, spec.checkpoints);
        let opt = OptimizerConfig::Tusla { lambda, beta: spec.beta, r: ctx.ac.r };
        let ens = run_ensemble(&opt, &problem, &theta0, cfg.schedule.batch_size, &checkpoints, &cfg.schedule.seeds)?;
        let blown: Vec<_> = ens.seeds.iter().copied().zip(ens.blow_ups.iter().copied()).collect();
        if !cfg.schedule.allow_blow_up && failure.is_none() {
            failure = blow_up_error("wasserstein ensemble", &blown);
        }
        let mut rows = Vec::new();
        for (c, &n) in ens.checkpoints.iter().enumerate() {
            let states: Vec<Vec<f64>> = ens.states[c].iter().filter(|s| s.iter().all(|v| v.is_finite())).cloned().collect();
            if states.is_empty() {
                continue;
            }
            let emp = EmpiricalMeasure::new(states.iter().map(|s| s[0]).collect())?;
            let u = |t: &[f64]| problem.u(t[0]).unwrap_or(f64::INFINITY);
            let b = |k| evaluate_bound(k, n, lambda, &ctx.ac, &ctx.tc).log10();
            rows.push(WassersteinRow {
                n,
                t: lambda * n as f64,
                lambda,
                w1: wasserstein_1d(&emp, Target::Density(&ctx.density), 1)?,
                w2: wasserstein_1d(&emp, Target::Density(&ctx.density), 2)?,
                excess_risk: excess_risk(&states, &u, ctx.u_star)?,
                second_moment: emp.abs_moment(2.0),
                w1_bound_log10: b(BoundKind::W1),
                w2_bound_log10: b(BoundKind::W2),
                excess_risk_bound_log10: b(BoundKind::ExcessRisk),
            });
        }
        let header = WASSERSTEIN_HEADER.map(String::from);
        let file = format!("wasserstein_{i}.csv");
        w.write_csv(&file, &header, &rows.iter().map(|r| r.values()).collect::<Vec<_>>())?;
        tables.push(json!({
            "lambda_fraction": f,
            "lambda": lambda,
            "file": file,
            "rows": rows,
            "blow_ups": ens.blow_ups.iter().filter(|b| b.is_some()).count(),
        }));
    }
    Ok((
        json!({
            "lambda_max_relaxed": lambda_tilde,
            "lambda_max_log10": ctx.dc.lambda_max.log10(),
            "note": "the stepsizes exceed λ_max, so the bounds are evaluated outside their proven range",
            "target_mean": ctx.density.mean(),
            "target_second_moment": ctx.density.abs_moment(2.0),
            "u_star": ctx.u_star,
            "tables": tables,
        }),
        failure,
    ))
}

// ---------------------------------------------------------------- transfer

/// Stage-1 target `ỹ(z) = −|z¹ + 2z² − 1|²`.
pub fn stage1_target(z: &[f64]) -> f64 {
    -(z[0] + 2.0 * z[1] - 1.0).powi(2)
}

/// Stage-2 target `y(z) = |2z¹ + 2z² − 1.5|³`.
pub fn stage2_target(z: &[f64]) -> f64 {
    (2.0 * z[0] + 2.0 * z[1] - 1.5).abs().powi(3)
}

fn synthetic(rng: &mut RngStream, n: usize, target: fn(&[f64]) -> f64, name: &str) -> Result<Dataset> {
    let mut features = Vec::with_capacity(2 * n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let z = [rng.uniform(), rng.uniform()];
        features.extend_from_slice(&z);
        targets.push(target(&z));
    }
    Ok(Dataset::from_rows(2, 1, features, targets, name)?)
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Outcome of one transfer run.
#[derive(Debug, Clone, Serialize)]
pub struct TransferSeed {
    pub seed: u64,
    pub stage1_final_mse: f64,
    pub stage2_final_mse: f64,
    pub stage1_converged: bool,
}

/// Curves, plot grid and trained parameters of one seed.
struct TransferRun {
    result: TransferSeed,
    stage1: Vec<Vec<f64>>,
    stage2: Vec<Vec<f64>>,
    plot: Vec<Vec<f64>>,
    params: Value,
}

fn transfer(cfg: &RunConfig, w: &BundleWriter) -> Result<JobOutput> {
    let t = cfg.transfer.as_ref().expect("validated");
    let mut data_rng = RngStream::new(t.data_seed);
    let ds1 = synthetic(&mut data_rng, t.samples, stage1_target, "stage 1: ỹ(z) = −|z1 + 2z2 − 1|², z ~ U(0,1)²")?;
    let ds2 = synthetic(&mut data_rng, t.samples, stage2_target, "stage 2: y(z) = |2z1 + 2z2 − 1.5|³, z ~ U(0,1)²")?;
    let var1 = variance(&ds1.targets);
    let var2 = variance(&ds2.targets);
    let net1 = FeedForwardNet::transfer_two_layer(2, t.d1, t.d2, t.eta, 3.0, ds1.train_law())?;
    let tusla1 = OptimizerConfig::Tusla { lambda: t.lambda, beta: t.beta, r: 3.0 };
    let tusla2 = OptimizerConfig::Tusla { lambda: t.lambda, beta: t.beta, r: 2.0 };
    let mse1 = |th: &[f64]| (0..ds1.len()).map(|i| net1.data_loss(th, ds1.y(i), ds1.z(i))).sum::<f64>() / ds1.len() as f64;
    let header: Vec<String> = EPOCH_HEADER.iter().map(|h| h.to_string()).collect();
    let grid: Vec<[f64; 2]> = (0..t.grid_points)
        .flat_map(|a| (0..t.grid_points).map(move |b| (a, b)))
        .map(|(a, b)| {
            let g = (t.grid_points - 1) as f64;
            [a as f64 / g, b as f64 / g]
        })
        .collect();

    let outcomes = cfg
        .schedule
        .seeds
        .par_iter()
        .map(|&seed| -> Result<TransferRun> {
            let mut init_rng = RngStream::new(seed);
            let theta1 = xavier_init(&net1, &mut init_rng);
            let sched = |epochs| EpochSchedule { epochs, batch_size: cfg.schedule.batch_size, seed, decay: cfg.schedule.decay };
            let (th1, hist1, term1) = train_epochs(&tusla1, &net1, &ds1, &theta1, &sched(t.stage1_epochs), |_, th| vec![mse1(th)])?;
            let stage1_mse = if matches!(term1, Termination::Completed) { mse1(&th1) } else { f64::NAN };
            let converged = stage1_mse <= t.stage1_max_relative_mse * var1;
            let mut result = TransferSeed { seed, stage1_final_mse: stage1_mse, stage2_final_mse: f64::NAN, stage1_converged: converged };
            if !converged {
                return Ok(TransferRun { result, stage1: epoch_rows(&hist1), stage2: Vec::new(), plot: Vec::new(), params: json!({ "stage1": th1 }) });
            }
            let c = net1.weights(&th1, 0).to_vec();
            let net2 = FixedInputNet::new(t.d1, 2, 1, c, t.eta, ds2.train_law())?;
            let mut theta2 = vec![0.0; net2.dim()];
            let bound = (6.0 / (t.d1 + 1) as f64).sqrt();
            for v in &mut theta2[..t.d1] {
                *v = (2.0 * init_rng.uniform() - 1.0) * bound;
            }
            let fit2 = |th: &[f64], z: &[f64]| net2.forward(th, z).map(|o| o[0]).unwrap_or(f64::NAN);
            let mse2 = |th: &[f64]| (0..ds2.len()).map(|i| (ds2.y(i)[0] - fit2(th, ds2.z(i))).powi(2)).sum::<f64>() / ds2.len() as f64;
            let (th2, hist2, term2) = train_epochs(
                &tusla2,
                &net2,
                &ds2,
                &ParamVector::new(theta2)?,
                &sched(t.stage2_epochs),
                |_, th| vec![mse2(th)],
            )?;
            result.stage2_final_mse = if matches!(term2, Termination::Completed) { mse2(&th2) } else { f64::NAN };
            let plot = grid
                .iter()
                .map(|z| vec![z[0], z[1], stage1_target(z), net1.forward(&th1, z)[0], stage2_target(z), fit2(&th2, z)])
                .collect();
            let params = json!({ "stage1": th1, "c": net1.weights(&th1, 0), "stage2": th2 });
            Ok(TransferRun { result, stage1: epoch_rows(&hist1), stage2: epoch_rows(&hist2), plot, params })
        })
        .collect::<Result<Vec<_>>>()?;

    let plot_header = ["z1", "z2", "stage1_true", "stage1_fit", "stage2_true", "stage2_fit"].map(String::from);
    let mut seeds = Vec::new();
    let mut failure = None;
    for run in outcomes {
        let res = run.result;
        w.write_csv(&format!("transfer/stage1_seed{}.csv", res.seed), &header, &run.stage1)?;
        w.write_json(&format!("transfer/params_seed{}.json", res.seed), &run.params)?;
        if res.stage1_converged {
            w.write_csv(&format!("transfer/stage2_seed{}.csv", res.seed), &header, &run.stage2)?;
            w.write_csv(&format!("transfer/grid_seed{}.csv", res.seed), &plot_header, &run.plot)?;
        } else if failure.is_none() {
            failure = Some(CliError::StageOne(format!(
                "seed {}: final stage-1 MSE {} exceeds {} × Var(ỹ) = {}",
                res.seed,
                res.stage1_final_mse,
                t.stage1_max_relative_mse,
                t.stage1_max_relative_mse * var1
            )));
        }
        seeds.push(res);
    }
    let s1: Vec<f64> = seeds.iter().map(|s| s.stage1_final_mse).collect();
    let s2: Vec<f64> = seeds.iter().map(|s| s.stage2_final_mse).collect();
    Ok((
        json!({
            "stage1_target_variance": var1,
            "stage2_baseline_mse": var2,
            "stage1_final_mse": Stat::of(&s1),
            "stage2_final_mse": Stat::of(&s2),
            "seeds": seeds,
        }),
        failure,
    ))
}
