//! Measurement instruments: Langevin SDE simulation, 1-D Gibbs-density
//! quadrature, empirical Wasserstein distances, excess risk and moment
//! tracking, plus seed-parallel ensembles of optimiser runs.

mod density;
mod ensemble;
mod risk;
mod sde;
mod wasserstein;

pub use density::{target_density_1d, GridSpec, TargetDensity1D, BOUNDARY_RATIO, DEFAULT_GRID_POINTS};
pub use ensemble::{par_seeds, run_ensemble, Ensemble};
pub use risk::{excess_risk, moment_track, u_star_grid};
pub use sde::{euler_maruyama, SdeConfig, SdePath, SdeRecord};
pub use wasserstein::{wasserstein_1d, EmpiricalMeasure, Target};

/// `n` checkpoints log-spaced between `first` and `last` (inclusive),
/// rounded to integers and deduplicated.
pub fn log_checkpoints(first: u64, last: u64, n: usize) -> Vec<u64> {
    if n <= 1 || first >= last {
        return vec![last];
    }
    let (a, b) = ((first.max(1) as f64).ln(), (last as f64).ln());
    let mut out: Vec<u64> =
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp().round() as u64).collect();
    out[n - 1] = last;
    out.dedup();
    out
}
