//! The constant cascades, from growth constants up to `C0..C9`.

use super::{integer_order, AssumptionConstants, DerivedConstants, TargetMoments};
use crate::error::{Error, Result};
use crate::numeric::{ln_binomial, ln_integral_exp_square, LogVal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

fn lv(x: f64) -> LogVal {
    LogVal::new(x)
}

fn pow2(e: f64) -> LogVal {
    LogVal::from_ln(e * LN_2)
}

fn binom(n: u32, k: u32) -> LogVal {
    LogVal::from_ln(ln_binomial(n as u64, k as u64))
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// `M^{2r} / (2(1 + M^{2r}))`, stable for astronomically large or small `M`.
fn kappa_of(m: LogVal, r: f64) -> LogVal {
    LogVal::from_ln(-LN_2 - softplus(-2.0 * r * m.ln()))
}

/// `1 + x` for a log value.
fn one_plus(x: LogVal) -> LogVal {
    LogVal::ONE.add(x)
}

/// `(1 + w²)^{p/2}`.
pub fn v_small(w: f64, p: f64) -> f64 {
    (1.0 + w * w).powf(p / 2.0)
}

/// Lyapunov function `V_p(θ) = (1 + |θ|²)^{p/2}`.
pub fn v_big(theta: &[f64], p: f64) -> f64 {
    v_small(crate::oracle::norm(theta), p)
}

/// Growth constant `K_H = 2^{2r} K_G + K_F` and local Lipschitz constant
/// `L_h = L_G + L_F E[(1+2|X|)^{ρ−1}] + 1`.
pub fn derive_growth(ac: &AssumptionConstants) -> Result<(f64, f64)> {
    let k_h = 2f64.powf(2.0 * ac.r) * ac.k_g + ac.k_f;
    let m = ac.moments.get(2.0, ac.rho - 1.0)?.value();
    let l_h = ac.l_g + ac.l_f * m + 1.0;
    Ok((k_h, l_h))
}

/// Dissipativity constants of `F` and `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipativity {
    /// `a_F = a/2`.
    pub a_f: f64,
    /// `b_F = (a/2 + b) R_F^{r̄+2} + K_F² μ_{2ρ}/(2a)`.
    pub b_f: LogVal,
    /// `R_F = max{(4b/a)^{1/(2r−r̄)}, 2^{1/(2r)}}`.
    pub r_f: f64,
    /// `a_h = 2^q K_G μ_ρ`.
    pub a_h: f64,
    /// `b_h = 3(2^{q+1} K_G μ_ρ / min{1, a_F})^{q+2} + b_F`.
    pub b_h: LogVal,
}

/// Dissipativity constants `(a_F, b_F, R_F, a_h, b_h)`.
pub fn derive_dissipativity(ac: &AssumptionConstants) -> Result<Dissipativity> {
    if !(ac.a > 0.0) {
        return Err(Error::InvalidConfig(format!("a must be positive, got {}", ac.a)));
    }
    if !(ac.r > 0.0) {
        return Err(Error::DegenerateExponent("R_F needs r > 0".into()));
    }
    let a_f = ac.a / 2.0;
    let first = if ac.b > 0.0 { (4.0 * ac.b / ac.a).powf(1.0 / (2.0 * ac.r - ac.r_bar)) } else { 0.0 };
    let r_f = first.max(2f64.powf(1.0 / (2.0 * ac.r)));
    let mu_2rho = ac.moments.mu(2.0 * ac.rho)?;
    let b_f = (lv(ac.a / 2.0 + ac.b) * lv(r_f).powf(ac.r_bar + 2.0)).add(lv(ac.k_f * ac.k_f) * mu_2rho / (2.0 * ac.a));
    let mu_rho = ac.moments.mu(ac.rho)?;
    let a_h = (pow2(ac.q) * ac.k_g * mu_rho).value();
    let b_h = ((pow2(ac.q + 1.0) * ac.k_g * mu_rho / a_f.min(1.0)).powf(ac.q + 2.0) * 3.0).add(b_f);
    Ok(Dissipativity { a_f, b_f, r_f, a_h, b_h })
}

/// One-sided Lipschitz constant `L_R = L_h (1+2R)^{2r}` and radius
/// `R = max{1, (3^{q−1} L_G/a)^{1/(2r−q+1)}, (2b/a)^{1/(2r−r̄)}}`.
pub fn derive_one_sided(ac: &AssumptionConstants) -> Result<(LogVal, f64)> {
    let e = 2.0 * ac.r - ac.q + 1.0;
    if e <= 0.0 {
        return Err(Error::DegenerateExponent(format!("2r − q + 1 = {e} must be positive")));
    }
    let (_, l_h) = derive_growth(ac)?;
    let second = (3f64.powf(ac.q - 1.0) * ac.l_g / ac.a).powf(1.0 / e);
    let third = if ac.b > 0.0 { (2.0 * ac.b / ac.a).powf(1.0 / (2.0 * ac.r - ac.r_bar)) } else { 0.0 };
    let big_r = 1f64.max(second).max(third);
    let l_r = lv(l_h) * lv(1.0 + 2.0 * big_r).powf(2.0 * ac.r);
    Ok((l_r, big_r))
}

/// `λ_{p,max} = min{1, min{(a_F/K_F)², (a_F/K_F)^{2/(2p−1)}} / (9 C(2p,p)² K_F² μ_{2pρ}²), 1/a_F, 1/(4a_F²)}`.
///
/// Returned as a log value: for large `p` it is far below `f64` range.
pub fn stepsize_max(p: u32, ac: &AssumptionConstants) -> Result<LogVal> {
    if p == 0 {
        return Err(Error::InvalidConfig("stepsize order p must be at least 1".into()));
    }
    let a_f = ac.a / 2.0;
    let ratio = lv(a_f / ac.k_f);
    let num = ratio.powf(2.0).min(ratio.powf(2.0 / (2.0 * p as f64 - 1.0)));
    let mu = ac.moments.mu(2.0 * p as f64 * ac.rho)?;
    let den = binom(2 * p, p).powf(2.0) * (9.0 * ac.k_f * ac.k_f) * mu.powf(2.0);
    Ok(LogVal::ONE.min(num / den).min(lv(1.0 / a_f)).min(lv(1.0 / (4.0 * a_f * a_f))))
}

/// `λ̃_max = min{1, a_F²/(16 K_F⁴), 1/a_F, 1/(4a_F²)}`, valid when `F` depends on `θ` only.
pub fn stepsize_max_relaxed(ac: &AssumptionConstants) -> Result<f64> {
    let a_f = ac.a / 2.0;
    if !(a_f > 0.0) {
        return Err(Error::InvalidConfig("a must be positive".into()));
    }
    Ok(1f64
        .min(a_f * a_f / (16.0 * ac.k_f.powi(4)))
        .min(1.0 / a_f)
        .min(1.0 / (4.0 * a_f * a_f)))
}

/// Second-moment constants `(M0, κ, c0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoment {
    /// `M0 = (2^{q+2} K_G μ_{2ρ} / min{1, a_F})^{1/(2r−q+1)}`.
    pub m0: LogVal,
    /// `κ = M0^{2r} / (2(1 + M0^{2r}))`.
    pub kappa: LogVal,
    /// `c0`.
    pub c0: LogVal,
}

impl FirstMoment {
    /// Uniform second-moment bound `E|θ0|² + c0 (1 + 1/(a_F κ))`.
    pub fn sup_bound(&self, ac: &AssumptionConstants) -> LogVal {
        let a_f = ac.a / 2.0;
        ac.theta0_moment(2.0).add(self.c0 * one_plus((self.kappa * a_f).recip()))
    }
}

/// Second-moment constants of the TUSLA iterates.
pub fn moment_constants_first(ac: &AssumptionConstants) -> Result<FirstMoment> {
    let e = 2.0 * ac.r - ac.q + 1.0;
    if e <= 0.0 {
        return Err(Error::DegenerateExponent(format!("2r − q + 1 = {e} must be positive")));
    }
    let dis = derive_dissipativity(ac)?;
    let a_f = dis.a_f;
    let (mu_rho, mu_2rho) = (ac.moments.mu(ac.rho)?, ac.moments.mu(2.0 * ac.rho)?);
    let m0 = (pow2(ac.q + 2.0) * ac.k_g * mu_2rho / a_f.min(1.0)).powf(1.0 / e);
    let kappa = kappa_of(m0, ac.r);
    let kg_mu = pow2(ac.q + 1.0) * ac.k_g * mu_rho;
    let c0 = LogVal::sum([
        lv(2.0 * ac.d as f64 / ac.beta),
        kappa * a_f * m0.powf(2.0),
        kg_mu * m0.powf(ac.q + 1.0),
        dis.b_f * 2.0,
        kg_mu,
        pow2(2.0 * ac.q + 1.0) * (ac.k_g * ac.k_g) * mu_2rho,
        lv(4.0 * ac.k_f * ac.k_f) * mu_2rho,
    ]);
    Ok(FirstMoment { m0, kappa, c0 })
}

/// Higher-moment constants of order `2p`, `p ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherMoment {
    pub p: u32,
    pub c3: LogVal,
    pub m1: LogVal,
    pub kappa_bar: LogVal,
    pub c4: LogVal,
    pub c5: LogVal,
    pub m2: LogVal,
    pub c0_bar: LogVal,
    pub m3: LogVal,
    pub kappa_tilde: LogVal,
    pub c6: LogVal,
    pub c7: LogVal,
    pub m4: LogVal,
    pub c0_tilde: LogVal,
    /// `κ♯_p = min{κ̄(p), κ̃(p)}`.
    pub kappa_sharp: LogVal,
    /// `c♯_p = max{c̄0(p), c̃0(p)}`.
    pub c_sharp: LogVal,
}

impl HigherMoment {
    /// `c♯_p (1 + 2/(a_F κ♯_p))`, the stationary part of the `2p`-th moment bound.
    pub fn tail(&self, a_f: f64) -> LogVal {
        self.c_sharp * one_plus((self.kappa_sharp * a_f).recip() * 2.0)
    }
}

struct BarCore {
    c3: LogVal,
    m1: LogVal,
    kappa: LogVal,
    c4: LogVal,
}

fn bar_core(p: u32, ac: &AssumptionConstants, dis: &Dissipativity) -> Result<BarCore> {
    let pf = p as f64;
    let mu_rho = ac.moments.mu(ac.rho)?;
    let c3 = binom(2 * p, p).powf(2.0)
        * pow2(2.0 * pf * (ac.q + 1.0))
        * (pf * (2.0 * pf - 1.0))
        * lv(ac.k_g).powf(2.0 * pf)
        * lv(1.0 + ac.k_f).powf(2.0 * pf)
        * ac.moments.mu(2.0 * pf * ac.rho)?;
    let kg_p = |e: f64| pow2(e) * (pf * ac.k_g) * mu_rho;
    let m1 = LogVal::sum([dis.b_f * (4.0 * pf), kg_p(ac.q + 2.0), c3 * 2.0]) / dis.a_f.min(1.0);
    let kappa = kappa_of(m1, ac.r);
    let c4 = LogVal::sum([
        kappa * dis.a_f * m1.powf(2.0 * pf),
        kg_p(ac.q + 1.0) * m1.powf(2.0 * pf + ac.q - 1.0),
        LogVal::sum([dis.b_f * (2.0 * pf), kg_p(ac.q + 1.0), c3]) * one_plus(m1.powf(2.0 * pf - 1.0)),
    ]);
    Ok(BarCore { c3, m1, kappa, c4 })
}

struct TildeCore {
    m3: LogVal,
    kappa: LogVal,
    c6: LogVal,
}

fn tilde_core(p: u32, ac: &AssumptionConstants, dis: &Dissipativity) -> Result<TildeCore> {
    let pf = p as f64;
    let kf2 = 4.0 * ac.k_f * ac.k_f;
    let inner = (pow2(2.0 * pf * (ac.q + 1.0)) * lv(ac.k_g).powf(2.0 * pf) * ac.moments.mu(2.0 * pf * ac.rho)?)
        .add(LogVal::ONE.add(dis.b_f * 2.0).add(lv(kf2)).powf(pf));
    let m3 = binom(p, p.div_ceil(2)) * LogVal::from_ln((pf + 2.0) * 3f64.ln()) * pf * inner / dis.a_f.min(1.0);
    let kappa = kappa_of(m3, ac.r);
    let mut terms = vec![kappa * dis.a_f * m3.powf(2.0 * pf)];
    for k in 1..=p {
        let kf = k as f64;
        let t = (pow2(kf * (2.0 * ac.q + 2.0)) * lv(ac.k_g).powf(2.0 * kf) * ac.moments.mu(2.0 * kf * ac.rho)?)
            .add((dis.b_f * 2.0).add(lv(kf2)).powf(kf));
        terms.push(binom(p, k) * LogVal::from_ln(kf * 3f64.ln()) * t * m3.powf(2.0 * pf + kf * (ac.q - 1.0)));
    }
    Ok(TildeCore { m3, kappa, c6: LogVal::sum(terms) })
}

/// `2^{2p−2} p(2p−1) d/β`, the Itô correction factor shared by both cascades.
fn ito_factor(p: f64, ac: &AssumptionConstants) -> LogVal {
    pow2(2.0 * p - 2.0) * (p * (2.0 * p - 1.0) * ac.d as f64 / ac.beta)
}

/// `2^{2p−4} (2p(2p−1))^{p+1} (d/β)^p`.
fn ito_tail(p: f64, ac: &AssumptionConstants) -> LogVal {
    pow2(2.0 * p - 4.0) * lv(2.0 * p * (2.0 * p - 1.0)).powf(p + 1.0) * lv(ac.d as f64 / ac.beta).powf(p)
}

/// `(2^{2p−1} p(2p−1) d/β / (a_F κ))^{1/2}`.
fn radius(p: f64, ac: &AssumptionConstants, a_f: f64, kappa: LogVal) -> LogVal {
    (pow2(2.0 * p - 1.0) * (p * (2.0 * p - 1.0) * ac.d as f64 / ac.beta) / (kappa * a_f)).sqrt()
}

/// The two higher-moment cascades of order `2p` (`p ≥ 2`) and their
/// combination `(κ♯_p, c♯_p)`.
///
/// The cascades reference `c4(p−1)` and `c6(p−1)`; these are evaluated with
/// the same formulas at order `p − 1` (so order 1 when `p = 2`).
pub fn moment_constants(p: u32, ac: &AssumptionConstants) -> Result<HigherMoment> {
    if p < 2 {
        return Err(Error::InvalidConfig(format!("higher-moment order p must be at least 2, got {p}")));
    }
    let dis = derive_dissipativity(ac)?;
    let pf = p as f64;
    let bar = bar_core(p, ac, &dis)?;
    let bar_prev = bar_core(p - 1, ac, &dis)?;
    let c5 = LogVal::sum([bar.c4, ito_factor(pf, ac) * bar_prev.c4, ito_tail(pf, ac)]);
    let m2 = radius(pf, ac, dis.a_f, bar.kappa);
    let c0_bar = c5.add(ito_factor(pf, ac) * m2.powf(2.0 * pf - 2.0));

    let tilde = tilde_core(p, ac, &dis)?;
    let tilde_prev = tilde_core(p - 1, ac, &dis)?;
    let c7 = LogVal::sum([tilde.c6, ito_factor(pf, ac) * tilde_prev.c6, ito_tail(pf, ac)]);
    let m4 = radius(pf, ac, dis.a_f, tilde.kappa);
    let c0_tilde = c7.add(ito_factor(pf, ac) * m4.powf(2.0 * pf - 2.0));

    Ok(HigherMoment {
        p,
        c3: bar.c3,
        m1: bar.m1,
        kappa_bar: bar.kappa,
        c4: bar.c4,
        c5,
        m2,
        c0_bar,
        m3: tilde.m3,
        kappa_tilde: tilde.kappa,
        c6: tilde.c6,
        c7,
        m4,
        c0_tilde,
        kappa_sharp: bar.kappa.min(tilde.kappa),
        c_sharp: c0_bar.max(c0_tilde),
    })
}

/// Drift-condition constants of `V_p` for the Langevin SDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub p: u32,
    /// `M_V(p) = (1/3 + 4b_h/(3a_h) + 4d/(3a_hβ) + 4(p−2)/(3a_hβ))^{1/2}`.
    pub m_v: LogVal,
    /// `v_p(M_V(p)) = (1 + M_V(p)²)^{p/2}`.
    pub v_at_m: LogVal,
    /// `c_{V,1}(p) = a_h p/4`.
    pub c_v1: f64,
    /// `c_{V,2}(p) = (3/4) a_h p v_p(M_V(p))`.
    pub c_v2: LogVal,
}

/// Drift constants `(M_V(p), c_{V,1}(p), c_{V,2}(p))`.
pub fn drift_constants(p: u32, ac: &AssumptionConstants, a_h: f64, b_h: LogVal) -> Drift {
    let pf = p as f64;
    let d = ac.d as f64;
    let m_v = LogVal::sum([
        lv(1.0 / 3.0),
        b_h * (4.0 / (3.0 * a_h)),
        lv(4.0 * d / (3.0 * a_h * ac.beta)),
        lv(4.0 * (pf - 2.0).max(0.0) / (3.0 * a_h * ac.beta)),
    ])
    .sqrt();
    let v_at_m = one_plus(m_v.powf(2.0)).powf(pf / 2.0);
    Drift { p, m_v, v_at_m, c_v1: a_h * pf / 4.0, c_v2: v_at_m * (0.75 * a_h * pf) }
}

/// Constants of the `w_{1,2}` contraction of the Langevin SDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    /// `c_{V,1}(2) = a_h/2`.
    pub c_v1: f64,
    /// `c_{V,2}(2) = (3/2) a_h v_2(M_V(2))`.
    pub c_v2: LogVal,
    /// `ċ0 = 2(4c_{V,2}(1+c_{V,1})/c_{V,1} − 1)^{1/2}`.
    pub c_dot0: LogVal,
    /// `ċ1 = 2(2c_{V,2}/c_{V,1} − 1)^{1/2}`.
    pub c_dot1: LogVal,
    pub phi_bar: LogVal,
    /// Largest admissible `ε` (capped at 1).
    pub eps: LogVal,
    /// Contraction rate `ċ`.
    pub c_dot: LogVal,
    /// Contraction prefactor `ĉ`.
    pub c_hat: LogVal,
}

/// Contraction constants `(ċ, ĉ, ε, φ̄, ċ0, ċ1)` given `L_R`, `a_h`, `b_h`.
///
/// `ε` is the printed upper bound itself (capped at 1); its integral
/// `∫_0^{ċ1} exp((s√(βL_R/8) + √(8/(βL_R)))²) ds` is evaluated in log domain.
pub fn contraction_constants(ac: &AssumptionConstants, l_r: LogVal, a_h: f64, b_h: LogVal) -> Result<Contraction> {
    if !(ac.beta > 0.0) || !(l_r.ln() > f64::NEG_INFINITY) {
        return Err(Error::InvalidConfig("contraction constants need β > 0 and L_R > 0".into()));
    }
    let drift = drift_constants(2, ac, a_h, b_h);
    let (c_v1, c_v2) = (drift.c_v1, drift.c_v2);
    let c_dot0 = (c_v2 * (4.0 * (1.0 + c_v1) / c_v1)).sub(LogVal::ONE).ok_or(Error::NonPositive)?.sqrt() * 2.0;
    let c_dot1 = (c_v2 * (2.0 / c_v1)).sub(LogVal::ONE).ok_or(Error::NonPositive)?.sqrt() * 2.0;
    let beta_lr = l_r * ac.beta;
    let alpha = (beta_lr / 8.0).sqrt().value();
    let gamma = (beta_lr / 8.0).sqrt().recip().value();
    let c0v = c_dot0.value();
    if !(alpha.is_finite() && c0v.is_finite()) {
        return Err(Error::NonFinite("contraction constants (β L_R or ċ0 out of range)"));
    }
    let pref = |scale: f64| (LogVal::new(scale * ac.beta * PI) / l_r).sqrt();
    let phi_bar = (pref(8.0) * c_dot0 * LogVal::exp((c0v * alpha + gamma).powi(2))).recip();
    let ln_int = ln_integral_exp_square(alpha, gamma, c_dot1.value());
    let eps_bound = (c_v2 * 4.0 * pref(2.0) * LogVal::from_ln(ln_int)).recip();
    let eps = LogVal::ONE.min(eps_bound);
    let c_dot = phi_bar.min(lv(c_v1)).min(c_v2 * eps * (4.0 * c_v1)) / 2.0;
    let c_hat = one_plus(c_dot0) * 2.0 * LogVal::exp(beta_lr.value() * c0v * c0v / 8.0 + 2.0 * c0v) / eps;
    Ok(Contraction { c_v1, c_v2, c_dot0, c_dot1, phi_bar, eps, c_dot, c_hat })
}

/// The constants of the W1, W2 and excess-risk theorems and their auxiliary
/// constants (`C̄` family).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    /// `min{ċ, a_F κ♯_2/2, a_h}`.
    pub rate: LogVal,
    pub cb01: LogVal,
    pub cb11: LogVal,
    pub cb0: LogVal,
    pub cb1: LogVal,
    pub cb2: LogVal,
    pub cb3: LogVal,
    pub cb4: LogVal,
    pub cb5: LogVal,
    pub cb6: LogVal,
    pub cb7: LogVal,
    pub c0: LogVal,
    pub c1: LogVal,
    pub c2: LogVal,
    pub c3: LogVal,
    pub c4: LogVal,
    pub c5: LogVal,
    pub c6: LogVal,
    pub c7: LogVal,
    pub c8: LogVal,
    /// `C9(β)` at the β of the assumption constants.
    pub c9: f64,
    pub r_theta_star: f64,
}

/// `C9(β) = d/2 ln(C̄7 e/a_h (β b_h/d + 1)) + ln 2` with
/// `C̄7 = L_h (1 + 4R_{θ*})^{2r}`, `R_{θ*} = max{√(b_h/a_h), √(2d/(β L_h))}`.
///
/// Returns `(C9, C̄7, R_{θ*})`.
pub fn c9_of_beta(beta: f64, ac: &AssumptionConstants, l_h: f64, a_h: f64, b_h: LogVal) -> (f64, LogVal, f64) {
    let d = ac.d as f64;
    let r_star = (b_h / a_h).sqrt().value().max((2.0 * d / (beta * l_h)).sqrt());
    let cb7 = lv(l_h) * lv(1.0 + 4.0 * r_star).powf(2.0 * ac.r);
    let c9 = d / 2.0 * (cb7.ln() + 1.0 - a_h.ln() + (b_h * (beta / d)).add(LogVal::ONE).ln()) + LN_2;
    (c9, cb7, r_star)
}

/// All theorem constants, given the derived constants and the target-measure
/// moments `∫V_2 dπ_β` and `E_π|θ|^{4r+2}`.
pub fn theorem_constants(
    ac: &AssumptionConstants,
    dc: &DerivedConstants,
    target: Option<&TargetMoments>,
) -> Result<TheoremConstants> {
    let target = target.ok_or(Error::MissingTargetMoment("∫V_2 dπ_β and E_π|θ|^{4r+2}"))?;
    let a_f = dc.dissipativity.a_f;
    let a_h = dc.dissipativity.a_h;
    let con = &dc.contraction;
    let h2 = dc.higher(2)?;
    let tail = |p: f64| -> Result<LogVal> { Ok(dc.higher(integer_order(p)?)?.tail(a_f)) };
    let (r, rho, d) = (ac.r, ac.rho, ac.d as f64);
    let k_h = lv(dc.k_h);
    let mu_rho = ac.moments.mu(rho)?;
    let mu_2rho = ac.moments.mu(2.0 * rho)?;
    let mu_4rho = ac.moments.mu(4.0 * rho)?;

    let rate = con.c_dot.min(h2.kappa_sharp * (a_f / 2.0)).min(lv(a_h));
    let rate_v = rate.value();
    let c_dot_v = con.c_dot.value();
    let sqrt2 = 2f64.sqrt();

    let cb01 = k_h.powf(4.0) * 64.0 * mu_4rho;
    let cb11 = (cb01 * one_plus(tail(4.0 * r + 2.0)?)).add(lv(32.0 * d * (d + 2.0) / (ac.beta * ac.beta)));
    let e4 = LogVal::exp(4.0 * dc.l_r.value());
    let a_term = LogVal::from_ln(4.0 * r * 3f64.ln()) * (dc.l_h * dc.l_h) / dc.l_r;
    let b_term = (k_h.powf(2.0) * 16.0 * one_plus(dc.l_r.recip()))
        .add(pow2(4.0 * r + 4.0 + 2.0 * rho) * lv(1.0 + ac.l_f + ac.l_g).powf(2.0));
    let cb0 = e4 * (a_term * cb01).add(b_term * mu_2rho);
    let cb1 = (e4 * a_term.add(b_term) * LogVal::sum([cb11, tail(4.0 * r)?, LogVal::ONE]))
        .add(e4 * (4.0 * ac.h0_norm * ac.h0_norm));
    let v4 = dc.drift4.v_at_m;
    let tail2 = h2.tail(a_f);
    let cb2 = LogVal::exp(rate_v / 4.0) * con.c_hat * one_plus(rate.recip() * 4.0) * cb0.add(lv(12.0));
    let cb3 = (con.c_hat / con.c_dot)
        * 2.0
        * LogVal::exp(c_dot_v / 2.0)
        * LogVal::sum([cb1, tail2 * 12.0, v4 * 9.0, lv(15.0)]);
    let v2_int = lv(target.v2_integral);
    let c0 = rate / 4.0;
    let c1 = pow2(4.0 * r + 1.0)
        * LogVal::exp(rate_v / 4.0)
        * LogVal::sum([cb0.sqrt(), cb2, con.c_hat * lv(2.0).add(v2_int)]);
    let c2 = cb1.sqrt().add(cb3);
    let cb4 = LogVal::exp(rate_v / 8.0)
        * con.c_hat.sqrt()
        * one_plus(rate.recip() * 8.0)
        * cb0.sqrt().add(lv(2.0 * sqrt2));
    let cb5 = (con.c_hat.sqrt() / con.c_dot)
        * 4.0
        * LogVal::exp(c_dot_v / 4.0)
        * LogVal::sum([cb1.sqrt(), tail2.sqrt() * (2.0 * sqrt2), (v4 * 3.0).sqrt(), lv(3.0 * sqrt2)]);
    let c3 = rate / 8.0;
    let c4 = pow2(2.0 * r + 1.0)
        * LogVal::exp(rate_v / 8.0)
        * LogVal::sum([cb0.sqrt(), cb4, con.c_hat.sqrt() * lv(2.0).add(v2_int).sqrt()]);
    let c5 = cb1.sqrt().add(cb5);
    let cb6 = k_h * mu_rho;
    let c6 = c3;
    let lead = pow2(2.0 * r) * cb6 / (2.0 * r + 2.0);
    let tail_2r1 = tail(2.0 * r + 1.0)?;
    let cz = lv(target.abs_moment_4r2).sqrt();
    let init_big = ac.theta0_moment(4.0 * (2.0 * r + 1.0)).add(LogVal::ONE);
    let c7 = c4 * (lead * LogVal::sum([LogVal::ONE, tail_2r1.sqrt(), cz])).add(cb6) * init_big;
    let c8 = c5 * (lead * ac.theta0_moment(4.0 * r + 2.0).add(tail_2r1).sqrt().add(cz)).add(cb6);
    let (c9, cb7, r_theta_star) = c9_of_beta(ac.beta, ac, dc.l_h, a_h, dc.dissipativity.b_h);
    Ok(TheoremConstants {
        rate,
        cb01,
        cb11,
        cb0,
        cb1,
        cb2,
        cb3,
        cb4,
        cb5,
        cb6,
        cb7,
        c0,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        r_theta_star,
    })
}
