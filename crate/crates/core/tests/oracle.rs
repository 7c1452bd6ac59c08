mod common;

use common::artificial;
use tusla::data::DataLaw;
use tusla::oracle::{norm, stochastic_gradient};
use tusla::{DataSample, Error, GradientOracle, ParamVector, RngStream};

fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

fn xs(v: &[f64]) -> Vec<DataSample> {
    v.iter().map(|&x| DataSample::new(vec![x]).unwrap()).collect()
}

#[test]
fn norm_examples() {
    assert_eq!(norm(&[0.0, 0.0, 0.0]), 0.0);
    assert_eq!(norm(&[3.0, 4.0]), 5.0);
    assert_eq!(norm(&[1.0, 1.0, 1.0, 1.0]), 2.0);
    assert_eq!(pv(&[3.0, 4.0]).norm(), 5.0);
}

#[test]
fn construction_rejects_non_finite() {
    assert!(matches!(ParamVector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(_))));
    assert!(ParamVector::new(vec![f64::INFINITY]).is_err());
    assert!(DataSample::new(vec![f64::NEG_INFINITY]).is_err());
}

#[test]
fn artificial_gradient_vanishes_at_zero() {
    let p = artificial();
    for x in [0.1, 0.5, 0.9] {
        let (mut f, mut g) = ([1.0], [1.0]);
        p.eval_f(&[0.0], &[x], &mut f);
        p.eval_g(&[0.0], &[x], &mut g);
        assert_eq!((f[0], g[0]), (0.0, 0.0));
        let h = stochastic_gradient(&p, &pv(&[0.0]), &xs(&[x])).unwrap();
        assert_eq!(h.as_slice(), &[0.0]);
    }
}

#[test]
fn artificial_gradient_hand_value() {
    // x = 0.9 > θ = 0.5: H = 30·0.5^29 + 2·a2·θ + (a1−a2)θ² f_X(θ) with f_X(0.5) = 6·0.5·0.5.
    let p = artificial();
    let f_x = 6.0 * 0.5 * 0.5;
    let expected = 30.0 * 0.5f64.powi(29) + 2.0 * 1.0 * 0.5 + 1.0 * 0.25 * f_x;
    assert!((expected - (1.375 + 30.0 * 0.5f64.powi(29))).abs() < 1e-15);
    let h = stochastic_gradient(&p, &pv(&[0.5]), &xs(&[0.9])).unwrap();
    assert!((h.as_slice()[0] - expected).abs() < 1e-14);
}

#[test]
fn batch_mean_is_idempotent_on_duplicates() {
    let p = artificial();
    let theta = pv(&[0.3]);
    let one = stochastic_gradient(&p, &theta, &xs(&[0.2])).unwrap();
    let two = stochastic_gradient(&p, &theta, &xs(&[0.2, 0.2])).unwrap();
    assert_eq!(one, two);
}

#[test]
fn stochastic_gradient_rejects_bad_inputs() {
    let p = artificial();
    assert!(matches!(stochastic_gradient(&p, &pv(&[0.1]), &[]), Err(Error::Empty(_))));
    assert!(matches!(
        stochastic_gradient(&p, &pv(&[0.1, 0.2]), &xs(&[0.5])),
        Err(Error::DimensionMismatch { .. })
    ));
    let wide = vec![DataSample::new(vec![0.1, 0.2]).unwrap()];
    assert!(matches!(stochastic_gradient(&p, &pv(&[0.1]), &wide), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn h_equals_f_plus_g_and_is_pure() {
    let p = artificial();
    let mut rng = RngStream::new(7);
    for _ in 0..200 {
        let t = 4.0 * rng.uniform() - 2.0;
        let x = rng.uniform();
        let (mut f, mut g, mut h, mut h2) = ([0.0], [0.0], [0.0], [0.0]);
        p.eval_f(&[t], &[x], &mut f);
        p.eval_g(&[t], &[x], &mut g);
        p.eval_h(&[t], &[x], &mut h);
        p.eval_h(&[t], &[x], &mut h2);
        assert_eq!(h[0], f[0] + g[0]);
        assert_eq!(h[0].to_bits(), h2[0].to_bits());
    }
}

/// Mean of H(θ, X) over 10⁵ draws against the analytic h(θ), within 4 SE.
fn unbiased_at(oracle: &dyn GradientOracle, theta: f64, seed: u64) {
    let mut rng = RngStream::new(seed);
    let n = 100_000;
    let mut x = [0.0];
    let mut out = [0.0];
    // Welford: the naive s2/n − mean² cancels for |H| ~ 1e8.
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=n {
        oracle.data_law().sample_into(&mut rng, &mut x);
        oracle.eval_h(&[theta], &x, &mut out);
        let delta = out[0] - mean;
        mean += delta / k as f64;
        m2 += delta * (out[0] - mean);
    }
    let exact = oracle.h_exact(&[theta]).unwrap()[0];
    let se = (m2 / (n - 1) as f64 / n as f64).sqrt();
    // H does not depend on x for some θ (se = 0); allow summation rounding.
    let rounding = n as f64 * f64::EPSILON * exact.abs();
    assert!((mean - exact).abs() <= 4.0 * se + rounding, "θ = {theta}: mean {mean}, exact {exact}, se {se}");
}

#[test]
fn artificial_gradient_is_unbiased() {
    let beta = artificial();
    let normal = tusla::problems::ArtificialProblem::new(2.0, 1.0, DataLaw::StdNormal).unwrap();
    let mut rng = RngStream::new(11);
    for i in 0..20 {
        let t = 4.0 * rng.uniform() - 2.0;
        unbiased_at(&beta, t, 100 + i);
        unbiased_at(&normal, t, 200 + i);
    }
    unbiased_at(&beta, 0.7, 1);
}

#[test]
fn rng_stream_is_reproducible() {
    let mut a = RngStream::new(42);
    let mut b = RngStream::new(42);
    for _ in 0..1000 {
        assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }
    let mut c = RngStream::new(43);
    assert_ne!(RngStream::new(42).uniform(), c.uniform());
}

#[test]
fn rng_normal_moments() {
    let mut rng = RngStream::new(5);
    let n = 200_000;
    let v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    assert!((var - 1.0).abs() < 0.02);
}
