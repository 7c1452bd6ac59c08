mod common;

use common::artificial;
use tusla::empirics::*;
use tusla::optimizers::{run, OptimizerConfig, Record, Schedule, Termination, Trajectory};
use tusla::{Error, ParamVector, RngStream};

fn ou_path(beta: f64, seed: u64) -> SdePath {
    let cfg = SdeConfig { lambda: 1.0, beta, z0: vec![0.0], n_steps: 100_000, dt: 0.01, thinning: 1, deterministic: false };
    euler_maruyama(&cfg, &|z, out| out[0] = z[0], &mut RngStream::new(seed)).unwrap()
}

#[test]
fn sde_zero_drift_deterministic_is_constant() {
    let cfg = SdeConfig { lambda: 0.5, beta: 1.0, z0: vec![1.5, -2.0], n_steps: 100, dt: 0.1, thinning: 10, deterministic: true };
    let path = euler_maruyama(&cfg, &|_, out| out.fill(0.0), &mut RngStream::new(1)).unwrap();
    assert_eq!(path.termination, Termination::Completed);
    assert_eq!(path.records.len(), 11);
    assert!(path.records.iter().all(|r| r.z == vec![1.5, -2.0]));
}

#[test]
fn sde_ou_stationary_moments() {
    let beta = 2.0;
    let path = ou_path(beta, 3);
    let tail: Vec<f64> = path.records.iter().skip(1000).map(|r| r.z[0]).collect();
    let m2 = tail.iter().map(|z| z * z).sum::<f64>() / tail.len() as f64;
    assert!((m2 - 1.0 / beta).abs() / (1.0 / beta) < 0.1, "second moment {m2}");
}

#[test]
fn sde_same_seed_same_path_and_blow_up_flag() {
    assert_eq!(ou_path(1.0, 9), ou_path(1.0, 9));
    let cfg = SdeConfig { lambda: 1.0, beta: 1.0, z0: vec![2.0], n_steps: 100, dt: 1.0, thinning: 50, deterministic: true };
    let path = euler_maruyama(&cfg, &|z, out| out[0] = z[0].powi(5), &mut RngStream::new(1)).unwrap();
    assert!(matches!(path.termination, Termination::BlowUp { .. }));
    assert!(!path.records.last().unwrap().z[0].is_finite());
    let bad = SdeConfig { dt: 0.0, ..cfg };
    assert!(euler_maruyama(&bad, &|_, o| o.fill(0.0), &mut RngStream::new(1)).is_err());
}

#[test]
fn gaussian_target_density() {
    let t = target_density_1d(&|x| 0.5 * x * x, 1.0, GridSpec { lo: -12.0, hi: 12.0, points: 1 << 15 }).unwrap();
    assert!((t.abs_moment(2.0) - 1.0).abs() < 1e-4);
    assert!((t.abs_moment(4.0) - 3.0).abs() < 1e-3);
    assert!((t.expect(|_| 1.0) - 1.0).abs() < 1e-6);
    assert!(((t.ln_normaliser) - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-8);
    assert_eq!(*t.cdf.last().unwrap(), 1.0);
    assert!(t.cdf.windows(2).all(|w| w[0] <= w[1]));
    assert!((t.quantile(0.975) - 1.959964).abs() < 1e-3);
}

#[test]
fn quantile_inverts_cdf() {
    let t = target_density_1d(&|x| x.powi(4) - x * x, 3.0, GridSpec { lo: -4.0, hi: 4.0, points: 4097 }).unwrap();
    let h = t.grid.step();
    let mut prev = f64::NEG_INFINITY;
    for i in 1..1000 {
        let q = t.quantile(i as f64 / 1000.0);
        assert!(q >= prev);
        prev = q;
    }
    for i in 0..200 {
        // Stay where the CDF increments are resolvable in f64.
        let x = -1.5 + 3.0 * i as f64 / 200.0;
        assert!((t.quantile(t.cdf_at(x)) - x).abs() <= h);
    }
}

#[test]
fn narrow_grid_is_rejected_and_overflow_is_handled() {
    let err = target_density_1d(&|x| 0.5 * x * x, 1.0, GridSpec { lo: -2.0, hi: 2.0, points: 1001 });
    assert!(matches!(err, Err(Error::GridTooNarrow { .. })));
    // e^{−βu} underflows everywhere without the max shift.
    let t = target_density_1d(&|x| 1e6 + 0.5 * x * x, 1e3, GridSpec { lo: -1.0, hi: 1.0, points: 1 << 14 }).unwrap();
    assert!((t.expect(|_| 1.0) - 1.0).abs() < 1e-6);
    assert!((t.abs_moment(2.0) - 1e-3).abs() < 1e-6);
}

#[test]
fn artificial_target_mode_at_zero() {
    let p = artificial();
    let t = target_density_1d(&|x| p.u(x).unwrap(), 10.0, GridSpec::around(0.0, 0.3)).unwrap();
    assert!(t.mode().abs() < 0.05);
    // Unimodal: density increases up to the mode and decreases after it.
    let i = t.density.iter().position(|&d| d == t.density.iter().copied().fold(0.0, f64::max)).unwrap();
    assert!(t.density[..=i].windows(2).all(|w| w[0] <= w[1]));
    assert!(t.density[i..].windows(2).all(|w| w[0] >= w[1]));
    let (u_star, arg) = u_star_grid(&|x| p.u(x).unwrap(), &GridSpec { lo: -2.0, hi: 2.0, points: 4001 });
    assert_eq!((u_star, arg), (0.0, 0.0));
}

fn emp(v: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::new(v.to_vec()).unwrap()
}

#[test]
fn wasserstein_examples() {
    let a = emp(&[0.3, -1.0, 2.0]);
    assert_eq!(wasserstein_1d(&a, Target::Empirical(&a), 1).unwrap(), 0.0);
    let (z, o) = (emp(&[0.0]), emp(&[1.0]));
    assert_eq!(wasserstein_1d(&z, Target::Empirical(&o), 1).unwrap(), 1.0);
    assert_eq!(wasserstein_1d(&z, Target::Empirical(&o), 2).unwrap(), 1.0);
    assert!(wasserstein_1d(&z, Target::Empirical(&o), 3).is_err());
    assert!(EmpiricalMeasure::new(vec![]).is_err());
    assert!(EmpiricalMeasure::new(vec![f64::NAN]).is_err());
}

#[test]
fn wasserstein_shift_equals_brute_force() {
    let mut rng = RngStream::new(2);
    let xs: Vec<f64> = (0..300).map(|_| rng.normal()).collect();
    let c = -0.7;
    let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
    // Brute force: sorted pairing of equal-size samples.
    let (mut a, mut b) = (xs.clone(), shifted.clone());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let brute = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    let w = wasserstein_1d(&emp(&xs), Target::Empirical(&emp(&shifted)), 1).unwrap();
    assert!((w - brute).abs() < 1e-12 && (w - c.abs()).abs() < 1e-12);
}

#[test]
fn wasserstein_triangle_inequality() {
    let mut rng = RngStream::new(6);
    for _ in 0..200 {
        let draw = |rng: &mut RngStream| {
            let n = 1 + rng.index(40);
            let s = 3.0 * rng.uniform();
            emp(&(0..n).map(|_| s * rng.normal() + rng.uniform()).collect::<Vec<_>>())
        };
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        for p in [1, 2] {
            let ab = wasserstein_1d(&a, Target::Empirical(&b), p).unwrap();
            let bc = wasserstein_1d(&b, Target::Empirical(&c), p).unwrap();
            let ac = wasserstein_1d(&a, Target::Empirical(&c), p).unwrap();
            assert!(ac <= ab + bc + 1e-10);
            let ba = wasserstein_1d(&b, Target::Empirical(&a), p).unwrap();
            assert!((ab - ba).abs() < 1e-10);
        }
    }
}

#[test]
fn wasserstein_resampled_same_seed_is_zero() {
    let sample = |seed| {
        let mut rng = RngStream::new(seed);
        emp(&(0..100).map(|_| rng.normal()).collect::<Vec<_>>())
    };
    assert_eq!(wasserstein_1d(&sample(4), Target::Empirical(&sample(4)), 2).unwrap(), 0.0);
}

#[test]
fn wasserstein_to_density_shrinks_with_sample_size() {
    let t = target_density_1d(&|x| 0.5 * x * x, 1.0, GridSpec { lo: -12.0, hi: 12.0, points: 1 << 15 }).unwrap();
    let mut rng = RngStream::new(10);
    let small = emp(&(0..100).map(|_| rng.normal()).collect::<Vec<_>>());
    let large = emp(&(0..100_000).map(|_| rng.normal()).collect::<Vec<_>>());
    let ws = wasserstein_1d(&small, Target::Density(&t), 1).unwrap();
    let wl = wasserstein_1d(&large, Target::Density(&t), 1).unwrap();
    assert!(wl < ws && wl < 0.01);
    // The quantile grid of a density measured against itself.
    let exact = emp(&(0..1000).map(|i| t.quantile((i as f64 + 0.5) / 1000.0)).collect::<Vec<_>>());
    assert!(wasserstein_1d(&exact, Target::Density(&t), 1).unwrap() < 1e-12);
}

#[test]
fn excess_risk_examples() {
    let u = |t: &[f64]| t[0] * t[0];
    assert_eq!(excess_risk(&[vec![0.0], vec![0.0]], &u, 0.0).unwrap(), 0.0);
    assert_eq!(excess_risk(&[vec![-1.0], vec![1.0]], &u, 0.0).unwrap(), 1.0);
    assert!(excess_risk(&[], &u, 0.0).is_err());
}

fn constant_trajectory(theta: Vec<f64>, steps: &[u64]) -> Trajectory {
    Trajectory {
        seed: 0,
        config: OptimizerConfig::Sgd { lr: 0.1 },
        schedule: Schedule { n_steps: *steps.last().unwrap(), batch_size: 1, thinning: 1, seed: 0, deterministic: true, decay: None },
        theta0: theta.clone(),
        records: steps.iter().map(|&n| Record { n, theta: theta.clone(), loss: 0.0 }).collect(),
        termination: Termination::Completed,
    }
}

#[test]
fn moment_track_examples() {
    let steps = [1, 2, 5];
    let trajs = vec![constant_trajectory(vec![2.0, 0.0], &steps), constant_trajectory(vec![0.0, -2.0], &steps)];
    assert_eq!(moment_track(&trajs, 2.0).unwrap(), vec![(1, 4.0), (2, 4.0), (5, 4.0)]);
    let single = [constant_trajectory(vec![3.0], &steps)];
    assert_eq!(moment_track(&single, 4.0).unwrap()[0], (1, 81.0));
    let misaligned = vec![constant_trajectory(vec![1.0], &[1, 2]), constant_trajectory(vec![1.0], &[1, 3])];
    assert!(moment_track(&misaligned, 2.0).is_err());
}

#[test]
fn ou_second_moment_track_settles() {
    let beta = 4.0;
    let paths: Vec<SdePath> = (0..64)
        .map(|s| {
            let cfg = SdeConfig { lambda: 1.0, beta, z0: vec![1.0], n_steps: 2000, dt: 0.01, thinning: 100, deterministic: false };
            euler_maruyama(&cfg, &|z, o| o[0] = z[0], &mut RngStream::new(s)).unwrap()
        })
        .collect();
    let last: Vec<f64> = paths.iter().map(|p| p.records.last().unwrap().z[0]).collect();
    let m2 = last.iter().map(|z| z * z).sum::<f64>() / last.len() as f64;
    assert!((m2 - 1.0 / beta).abs() < 0.1, "{m2}");
}

#[test]
fn ensemble_matches_single_runs() {
    let p = artificial();
    let cfg = OptimizerConfig::Tusla { lambda: 1e-3, beta: 100.0, r: 14.0 };
    let theta0 = ParamVector::new(vec![3.0]).unwrap();
    let checkpoints = [0, 10, 250, 400];
    let e = run_ensemble(&cfg, &p, &theta0, 2, &checkpoints, &[5, 6]).unwrap();
    for (s, &seed) in e.seeds.iter().enumerate() {
        let sched = Schedule { n_steps: 400, batch_size: 2, thinning: 10, seed, deterministic: false, decay: None };
        let t = run(&cfg, &p, &theta0, &sched).unwrap();
        for (c, &n) in checkpoints.iter().enumerate() {
            let want = if n == 0 { theta0.as_slice().to_vec() } else { t.records.iter().find(|r| r.n == n).unwrap().theta.clone() };
            assert_eq!(e.states[c][s], want, "seed {seed}, n {n}");
        }
    }
    assert!(e.blow_ups.iter().all(Option::is_none));
    assert!(run_ensemble(&cfg, &p, &theta0, 1, &[5, 5], &[1]).is_err());
}

#[test]
fn log_checkpoint_grid() {
    let g = log_checkpoints(1, 1_000_000, 7);
    assert_eq!(g, vec![1, 10, 100, 1000, 10_000, 100_000, 1_000_000]);
    assert_eq!(log_checkpoints(5, 5, 3), vec![5]);
}
