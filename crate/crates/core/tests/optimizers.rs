mod common;

use common::{artificial, ConstOracle, ZeroOracle};
use tusla::bounds::{AssumptionConstants, DerivedConstants};
use tusla::data::DataLaw;
use tusla::empirics::moment_track;
use tusla::optimizers::{
    adaptive_step, run, sgld_step, sgld_update, tame, taming_factor, tusla_step, tusla_update, Decay, OptimizerConfig,
    OptimizerState, Schedule, Termination, TuslaConfig,
};
use tusla::{GradientOracle, ParamVector, RngStream};

fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

fn schedule(n_steps: u64, thinning: u64, seed: u64) -> Schedule {
    Schedule { n_steps, batch_size: 1, thinning, seed, deterministic: false, decay: None }
}

#[test]
fn taming_examples() {
    assert_eq!(tame(&pv(&[3.0, -2.0]), &pv(&[0.0, 0.0]), 0.1, 14.0), pv(&[3.0, -2.0]));
    assert!((tame(&pv(&[10.0]), &pv(&[2.0]), 0.25, 0.5).as_slice()[0] - 5.0).abs() < 1e-15);
    // √0.001 · 4^28 by brute arithmetic.
    let mut p = 1.0f64;
    for _ in 0..28 {
        p *= 4.0;
    }
    let denom = 0.001f64.sqrt() * p;
    assert!((denom - 2.28e15).abs() / 2.28e15 < 0.01);
    let t = tame(&pv(&[4e9]), &pv(&[4.0]), 0.001, 14.0).as_slice()[0];
    assert!(t.abs() <= 4e9 / denom * (1.0 + 1e-15) && t.abs() <= 1.76);
    assert!((t - 4e9 / (1.0 + denom)).abs() < 1e-18);
}

#[test]
fn taming_bound_property() {
    let mut rng = RngStream::new(3);
    for _ in 0..2000 {
        let d = 1 + rng.index(4);
        let theta: Vec<f64> = (0..d).map(|_| 6.0 * rng.uniform() - 3.0).collect();
        let h: Vec<f64> = (0..d).map(|_| 100.0 * rng.normal()).collect();
        let lambda = 10f64.powf(-6.0 * rng.uniform());
        let r = 4.0 * rng.uniform();
        let out = tame(&pv(&h), &pv(&theta), lambda, r);
        let (nh, nt) = (pv(&h).norm(), pv(&theta).norm());
        assert!(out.norm() <= nh * (1.0 + 1e-15));
        if nt > 0.0 {
            assert!(out.norm() <= nh / (lambda.sqrt() * nt.powf(2.0 * r)) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn tamed_increment_bound_on_artificial_problem() {
    let p = artificial();
    let ac = AssumptionConstants::artificial(&p, 10.0, 4.0);
    let dc = DerivedConstants::compute(&ac).unwrap();
    let mut rng = RngStream::new(9);
    let mut h = [0.0];
    for _ in 0..1000 {
        let t = 8.0 * rng.uniform() - 4.0;
        let x = rng.uniform();
        let lambda = 10f64.powf(-1.0 - 6.0 * rng.uniform());
        p.eval_h(&[t], &[x], &mut h);
        let step = lambda * (h[0] * taming_factor(&[t], lambda, 14.0)).abs();
        let a = t.abs();
        let bound = lambda.sqrt() * dc.k_h * (1.0 + x.abs()) * (1.0 + a.powi(29)) / a.powi(28);
        assert!(step <= bound, "θ = {t}, step {step}, bound {bound}");
    }
}

#[test]
fn tusla_deterministic_hand_value() {
    let oracle = ConstOracle { c: 4.0, law: DataLaw::Uniform01 };
    let mut state = OptimizerState::new(&pv(&[1.0]));
    let cfg = TuslaConfig { lambda: 0.25, beta: 1.0, r: 0.5 };
    tusla_step(&mut state, &oracle, &[0.3], &cfg, None).unwrap();
    assert!((state.theta[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(state.n, 1);
}

#[test]
fn zero_drift_is_identity_in_deterministic_mode() {
    let oracle = ZeroOracle::new(3);
    let theta0 = [0.3, -1.0, 2.0];
    let mut a = OptimizerState::new(&pv(&theta0));
    let mut b = OptimizerState::new(&pv(&theta0));
    for _ in 0..10 {
        tusla_step(&mut a, &oracle, &[0.5], &TuslaConfig { lambda: 0.1, beta: 1.0, r: 1.0 }, None).unwrap();
        sgld_step(&mut b, &oracle, &[0.5], 0.1, 1.0, None).unwrap();
    }
    assert_eq!(a.theta, theta0);
    assert_eq!(b.theta, theta0);
    for cfg in [
        OptimizerConfig::Sgd { lr: 0.1 },
        OptimizerConfig::adam(0.1),
        OptimizerConfig::amsgrad(0.1),
        OptimizerConfig::rmsprop(0.1),
    ] {
        let mut s = OptimizerState::new(&pv(&theta0));
        for _ in 0..10 {
            adaptive_step(&mut s, &[0.0; 3], &cfg, 1.0).unwrap();
        }
        assert_eq!(s.theta, theta0, "{}", cfg.name());
    }
}

#[test]
fn same_seed_same_trajectory() {
    let p = artificial();
    let cfg = OptimizerConfig::Tusla { lambda: 1e-3, beta: 1e3, r: 14.0 };
    let a = run(&cfg, &p, &pv(&[4.0]), &schedule(500, 7, 21)).unwrap();
    let b = run(&cfg, &p, &pv(&[4.0]), &schedule(500, 7, 21)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run(&cfg, &p, &pv(&[4.0]), &schedule(500, 7, 22)).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn sgld_blows_up_from_four() {
    // 0.001 · 30 · 4^29 by repeated multiplication.
    let mut p29 = 1.0f64;
    for _ in 0..29 {
        p29 *= 4.0;
    }
    assert!(0.001 * 30.0 * p29 > 1e6);
    let p = artificial();
    let mut s = OptimizerState::new(&pv(&[4.0]));
    sgld_step(&mut s, &p, &[0.5], 0.001, 1e10, None).unwrap();
    assert!(s.theta[0].abs() > 1e6);
}

#[test]
fn sgld_matches_untamed_tusla() {
    let p = artificial();
    let (lambda, beta) = (1e-4, 100.0);
    let mut a = OptimizerState::new(&pv(&[0.8]));
    let mut b = OptimizerState::new(&pv(&[0.8]));
    let (mut ra, mut rb) = (RngStream::new(5), RngStream::new(5));
    let mut h = [0.0];
    for _ in 0..200 {
        let x = [ra.uniform()];
        rb.uniform();
        p.eval_h(&a.theta, &x, &mut h);
        sgld_update(&mut a, &h, lambda, beta, Some(&mut ra));
        // TUSLA with the taming replaced by the identity.
        b.theta[0] -= lambda * h[0];
        b.theta[0] += (2.0 * lambda / beta).sqrt() * rb.normal();
        assert_eq!(a.theta[0].to_bits(), b.theta[0].to_bits());
    }
}

#[test]
fn tusla_update_uses_noise_scale() {
    let cfg = TuslaConfig { lambda: 0.01, beta: 2.0, r: 1.0 };
    let mut s = OptimizerState::new(&pv(&[0.0]));
    let mut rng = RngStream::new(1);
    tusla_update(&mut s, &[0.0], &cfg, 1.0, Some(&mut rng));
    let xi = RngStream::new(1).normal();
    assert!((s.theta[0] - (2.0 * 0.01 / 2.0f64).sqrt() * xi).abs() < 1e-15);
}

#[test]
fn adam_first_step_closed_form() {
    let cfg = OptimizerConfig::adam(0.001);
    let mut s = OptimizerState::new(&pv(&[1.0]));
    adaptive_step(&mut s, &[0.5], &cfg, 1.0).unwrap();
    let expected = 1.0 - 0.001 * 0.5 / (0.5 + 1e-8);
    assert!((s.theta[0] - expected).abs() < 1e-15);
    assert!((s.theta[0] - 0.999).abs() < 1e-10);
}

#[test]
fn amsgrad_keeps_max_accumulator() {
    let cfg = OptimizerConfig::amsgrad(0.001);
    let mut s = OptimizerState::new(&pv(&[0.0]));
    adaptive_step(&mut s, &[1.0], &cfg, 1.0).unwrap();
    let after_one = s.v_max[0];
    // v̂ after g = 1: v = 0.001, bias-corrected 1.
    assert!((after_one - 1.0).abs() < 1e-12);
    adaptive_step(&mut s, &[0.1], &cfg, 1.0).unwrap();
    assert_eq!(s.v_max[0], after_one);
}

#[test]
fn rmsprop_two_steps_by_hand() {
    let cfg = OptimizerConfig::rmsprop(0.01);
    let mut s = OptimizerState::new(&pv(&[0.5]));
    let (g1, g2) = (0.3, -0.7);
    adaptive_step(&mut s, &[g1], &cfg, 1.0).unwrap();
    adaptive_step(&mut s, &[g2], &cfg, 1.0).unwrap();
    let v1 = 0.01 * g1 * g1;
    let t1 = 0.5 - 0.01 * g1 / (v1.sqrt() + 1e-8);
    let v2 = 0.99 * v1 + 0.01 * g2 * g2;
    let t2 = t1 - 0.01 * g2 / (v2.sqrt() + 1e-8);
    assert!((s.theta[0] - t2).abs() < 1e-15);
}

#[test]
fn adaptive_step_rejects_langevin_configs() {
    let mut s = OptimizerState::new(&pv(&[0.5]));
    let cfg = OptimizerConfig::Tusla { lambda: 0.1, beta: 1.0, r: 1.0 };
    assert!(adaptive_step(&mut s, &[0.1], &cfg, 1.0).is_err());
}

#[test]
fn simulation_one_tusla_converges_and_sgd_blows_up() {
    let p = artificial();
    let tusla = OptimizerConfig::Tusla { lambda: 1e-3, beta: 1e10, r: 14.0 };
    for seed in 1..=3 {
        let t = run(&tusla, &p, &pv(&[4.0]), &schedule(1000, 10, seed)).unwrap();
        assert_eq!(t.termination, Termination::Completed);
        assert!(t.final_theta()[0].abs() < 0.1);
        let sgd = run(&OptimizerConfig::Sgd { lr: 1e-3 }, &p, &pv(&[4.0]), &schedule(1000, 1, seed)).unwrap();
        assert!(sgd.blow_up_step().unwrap() <= 5);
    }
}

#[test]
fn final_state_is_always_recorded() {
    let p = artificial();
    let cfg = OptimizerConfig::Tusla { lambda: 1e-3, beta: 1e10, r: 14.0 };
    let t = run(&cfg, &p, &pv(&[1.0]), &schedule(50, 100, 1)).unwrap();
    assert_eq!(t.records.len(), 1);
    assert_eq!(t.records[0].n, 50);
    let t = run(&cfg, &p, &pv(&[1.0]), &schedule(50, 10, 1)).unwrap();
    let ns: Vec<u64> = t.records.iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![10, 20, 30, 40, 50]);
}

#[test]
fn run_rejects_invalid_schedules() {
    let p = artificial();
    let cfg = OptimizerConfig::Tusla { lambda: 1e-3, beta: 1e10, r: 14.0 };
    assert!(run(&cfg, &p, &pv(&[1.0]), &schedule(0, 1, 1)).is_err());
    let bad = OptimizerConfig::Tusla { lambda: -1.0, beta: 1e10, r: 14.0 };
    assert!(run(&bad, &p, &pv(&[1.0]), &schedule(10, 1, 1)).is_err());
}

#[test]
fn decay_multiplies_the_stepsize() {
    let oracle = ConstOracle { c: 1.0, law: DataLaw::Uniform01 };
    let mut sch = schedule(10, 1, 1);
    sch.deterministic = true;
    sch.decay = Some(Decay { at: 5, factor: 0.1, langevin: true });
    let cfg = OptimizerConfig::Sgld { lambda: 1.0, beta: 1.0 };
    let t = run(&cfg, &oracle, &pv(&[0.0]), &sch).unwrap();
    assert!((t.final_theta()[0] - (-5.0 - 0.5)).abs() < 1e-12);
    sch.decay = Some(Decay { at: 5, factor: 0.1, langevin: false });
    let t = run(&cfg, &oracle, &pv(&[0.0]), &sch).unwrap();
    assert!((t.final_theta()[0] + 10.0).abs() < 1e-12);
}

#[test]
fn second_moment_stays_below_the_first_moment_bound() {
    let p = artificial();
    let ac = AssumptionConstants::artificial(&p, 10.0, 4.0);
    let dc = DerivedConstants::compute(&ac).unwrap();
    let fm = &dc.first_moment;
    let (c0, kappa) = (fm.c0.value(), fm.kappa.value());
    let bound = 16.0 + c0 * (1.0 + 1.0 / (dc.dissipativity.a_f * kappa));
    let lambda = dc.lambda_max_by_p[0].value();
    let cfg = OptimizerConfig::Tusla { lambda, beta: 10.0, r: 14.0 };
    let runs: Vec<_> = (0..32).map(|s| run(&cfg, &p, &pv(&[4.0]), &schedule(10_000, 1, s)).unwrap()).collect();
    for (n, m) in moment_track(&runs, 2.0).unwrap() {
        assert!(m <= bound, "n = {n}: {m} > {bound}");
    }
}
