//! Excess-risk estimates and moment tracking across seeds.

use super::GridSpec;
use crate::error::{Error, Result};
use crate::optimizers::Trajectory;
use crate::oracle::norm;

/// `mean_i u(θ_i) − u*`.
pub fn excess_risk(samples: &[Vec<f64>], u: &dyn Fn(&[f64]) -> f64, u_star: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("excess-risk samples"));
    }
    let mean = samples.iter().map(|s| u(s)).sum::<f64>() / samples.len() as f64;
    if !mean.is_finite() {
        return Err(Error::NonFinite("mean objective over samples"));
    }
    Ok(mean - u_star)
}

/// `(u*, argmin)` by dense search over the grid nodes.
pub fn u_star_grid(u: &dyn Fn(f64) -> f64, grid: &GridSpec) -> (f64, f64) {
    grid.nodes()
        .into_iter()
        .map(|t| (u(t), t))
        .filter(|(v, _)| !v.is_nan())
        .fold((f64::INFINITY, f64::NAN), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// Cross-seed mean of `|θ_n|^order` at each recorded step.
///
/// All trajectories must share the same record steps.
pub fn moment_track(trajectories: &[Trajectory], order: f64) -> Result<Vec<(u64, f64)>> {
    let first = trajectories.first().ok_or(Error::Empty("trajectory set"))?;
    let steps: Vec<u64> = first.records.iter().map(|r| r.n).collect();
    for t in trajectories {
        if t.records.len() != steps.len() || t.records.iter().zip(&steps).any(|(r, &n)| r.n != n) {
            return Err(Error::InvalidConfig("trajectories record different steps".into()));
        }
    }
    let k = trajectories.len() as f64;
    Ok(steps
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let m = trajectories.iter().map(|t| norm(&t.records[i].theta).powf(order)).sum::<f64>() / k;
            (n, m)
        })
        .collect())
}
