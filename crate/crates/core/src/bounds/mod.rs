//! Every explicit constant and stepsize restriction of the TUSLA theory,
//! computed from primitive assumption constants and data moments, and the
//! resulting non-asymptotic bounds as functions of `(n, λ, β)`.
//!
//! Many constants overflow `f64` (binomials of order 116, `e^{4 L_R}`,
//! `e^{β L_R ċ0²/8}`), so everything past the primitive level is carried as a
//! [`LogVal`].

mod cascade;
mod moments;
mod report;

pub use cascade::{
    c9_of_beta, contraction_constants, derive_dissipativity, derive_growth, derive_one_sided, drift_constants, moment_constants,
    moment_constants_first, stepsize_max, stepsize_max_relaxed, theorem_constants, v_big, v_small, Contraction,
    Dissipativity, Drift, FirstMoment, HigherMoment, TheoremConstants,
};
pub use moments::{MomentEntry, MomentOrigin, MomentTable, MC_MOMENT_SAMPLES};
pub use report::{BoundsReport, ReportEntry};

use crate::error::{Error, Result};
use crate::numeric::LogVal;
use crate::problems::{ArtificialProblem, FixedInputNet};
use serde::{Deserialize, Serialize};

/// Primitive constants of the growth, continuity and convexity-at-infinity
/// assumptions, plus the data moments and initial value they are paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionConstants {
    pub q: f64,
    pub r: f64,
    pub r_bar: f64,
    pub rho: f64,
    /// Continuity-in-average constant of `G`.
    pub l_g: f64,
    /// Growth constant of `G`.
    pub k_g: f64,
    /// Local Lipschitz constant of `F`.
    pub l_f: f64,
    /// Growth constant of `F`.
    pub k_f: f64,
    /// Smallest eigenvalue of `E[A(X)]`.
    pub a: f64,
    /// Largest eigenvalue of `E[B(X)]`.
    pub b: f64,
    pub d: usize,
    pub beta: f64,
    /// `|h(0)|`.
    pub h0_norm: f64,
    /// `|θ0|` of the (deterministic) initial value, so `E|θ0|^k = |θ0|^k`.
    pub theta0_norm: f64,
    pub moments: MomentTable,
}

impl AssumptionConstants {
    /// Checks the documented ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.k_g > 1.0) {
            return bad(format!("K_G must exceed 1, got {}", self.k_g));
        }
        if !(self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.b >= 0.0) {
            return bad(format!("b must be nonnegative, got {}", self.b));
        }
        if !(self.r_bar >= 0.0 && self.r_bar < 2.0 * self.r) {
            return bad(format!("r̄ must lie in [0, 2r), got r̄ = {}, r = {}", self.r_bar, self.r));
        }
        if !(self.q >= 1.0 && self.rho >= 1.0 && self.r >= 0.0) {
            return bad(format!("need q ≥ 1, ρ ≥ 1, r ≥ 0; got q = {}, ρ = {}, r = {}", self.q, self.rho, self.r));
        }
        if !(self.l_g > 0.0 && self.l_f > 0.0 && self.k_f > 0.0) {
            return bad("L_G, L_F and K_F must be positive".into());
        }
        if !(self.beta > 0.0) || self.d == 0 {
            return bad("β must be positive and d at least 1".into());
        }
        if !(self.h0_norm >= 0.0 && self.theta0_norm >= 0.0) {
            return bad("|h(0)| and |θ0| must be nonnegative".into());
        }
        self.moments.validate()
    }

    /// Exponents outside the range covered by the theory (flagged, not refused).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.r < self.q / 2.0 {
            w.push(format!("r = {} is below q/2 = {}", self.r, self.q / 2.0));
        }
        if self.r.fract() != 0.0 {
            w.push(format!("r = {} is not an integer", self.r));
        }
        w
    }

    /// `E|θ0|^k`.
    pub fn theta0_moment(&self, k: f64) -> LogVal {
        LogVal::new(self.theta0_norm).powf(k)
    }

    /// Constants of the piecewise artificial problem: `L_F = 870`, `K_F = 30`,
    /// `a = 15`, `b = 0`, `r̄ = 0`, `|h(0)| = 0` and `L_G`, `K_G` from the
    /// density constants of the data law.
    pub fn artificial(problem: &ArtificialProblem, beta: f64, theta0_norm: f64) -> Self {
        let law = crate::oracle::GradientOracle::data_law(problem);
        let (r, rho) = (14.0, 1.0);
        Self {
            q: 3.0,
            r,
            r_bar: 0.0,
            rho,
            l_g: problem.l_g(),
            k_g: problem.k_g(),
            l_f: 870.0,
            k_f: 30.0,
            a: 15.0,
            b: 0.0,
            d: 1,
            beta,
            h0_norm: 0.0,
            theta0_norm,
            moments: MomentTable::for_law(law, r, rho, 10, 0),
        }
    }

    /// Constants of the fixed-input-weight network: `L_F = 5η`, `K_F = η`,
    /// `a = η/2`, `b = 0`, `r̄ = 0`, `K_G = 8 m2 d1² (1+c_F)²`.
    ///
    /// `L_G` depends on conditional-density bounds of the data and `|h(0)|`
    /// on the target law, so both are supplied by the caller.
    pub fn fixed_net(net: &FixedInputNet, l_g: f64, h0_norm: f64, beta: f64, theta0_norm: f64) -> Self {
        let law = crate::oracle::GradientOracle::data_law(net);
        let (r, rho) = (2.0, 2.0);
        Self {
            q: 4.0,
            r,
            r_bar: 0.0,
            rho,
            l_g,
            k_g: net.k_g(),
            l_f: 5.0 * net.eta,
            k_f: net.eta,
            a: net.eta / 2.0,
            b: 0.0,
            d: net.dim(),
            beta,
            h0_norm,
            theta0_norm,
            moments: MomentTable::for_law(law, r, rho, 10, 0),
        }
    }
}

/// Moments of the target measure `π_β` needed by the theorem constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetMoments {
    /// `∫ V_2 dπ_β = 1 + E_π|θ|²`.
    pub v2_integral: f64,
    /// `c_{Z∞,4r+2} = E_π|θ|^{4r+2}`.
    pub abs_moment_4r2: f64,
}

/// Everything derived from [`AssumptionConstants`] that does not need the
/// target-measure moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub k_h: f64,
    pub l_h: f64,
    pub dissipativity: Dissipativity,
    pub l_r: LogVal,
    pub big_r: f64,
    /// `λ_{p,max}` for `p = 1..=10`.
    pub lambda_max_by_p: Vec<LogVal>,
    /// `λ_max = λ_{4r+2,max}`.
    pub lambda_max: LogVal,
    /// `λ̃_max`, valid when `F` does not depend on the data.
    pub lambda_max_relaxed: f64,
    pub first_moment: FirstMoment,
    /// Higher-moment cascades for `p ∈ {2, 2r+1, 4r, 4r+2}`.
    pub higher_moments: Vec<HigherMoment>,
    pub drift2: Drift,
    pub drift4: Drift,
    pub contraction: Contraction,
    pub warnings: Vec<String>,
}

impl DerivedConstants {
    /// Evaluates every cascade.
    pub fn compute(ac: &AssumptionConstants) -> Result<Self> {
        ac.validate()?;
        let (k_h, l_h) = derive_growth(ac)?;
        let dissipativity = derive_dissipativity(ac)?;
        let (l_r, big_r) = derive_one_sided(ac)?;
        let lambda_max_by_p = (1..=10).map(|p| stepsize_max(p, ac)).collect::<Result<Vec<_>>>()?;
        let lambda_max = stepsize_max(integer_order(4.0 * ac.r + 2.0)?, ac)?;
        let lambda_max_relaxed = stepsize_max_relaxed(ac)?;
        let first_moment = moment_constants_first(ac)?;
        let mut orders = vec![2, integer_order(2.0 * ac.r + 1.0)?, integer_order(4.0 * ac.r)?, integer_order(4.0 * ac.r + 2.0)?];
        orders.sort_unstable();
        orders.dedup();
        let higher_moments = orders
            .into_iter()
            .map(|p| {
                if p < 2 {
                    Err(Error::DegenerateExponent(format!(
                        "higher-moment order {p} < 2; the theorem constants need r ≥ 1/2"
                    )))
                } else {
                    moment_constants(p, ac)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let drift2 = drift_constants(2, ac, dissipativity.a_h, dissipativity.b_h);
        let drift4 = drift_constants(4, ac, dissipativity.a_h, dissipativity.b_h);
        let contraction = contraction_constants(ac, l_r, dissipativity.a_h, dissipativity.b_h)?;
        let warnings = ac.warnings();
        Ok(Self {
            k_h,
            l_h,
            dissipativity,
            l_r,
            big_r,
            lambda_max_by_p,
            lambda_max,
            lambda_max_relaxed,
            first_moment,
            higher_moments,
            drift2,
            drift4,
            contraction,
            warnings,
        })
    }

    /// Higher-moment cascade of order `p` (one of `2, 2r+1, 4r, 4r+2`).
    pub fn higher(&self, p: u32) -> Result<&HigherMoment> {
        self.higher_moments
            .iter()
            .find(|h| h.p == p)
            .ok_or_else(|| Error::InvalidConfig(format!("higher-moment cascade of order {p} was not computed")))
    }
}

/// Converts an order like `4r + 2` to an integer, rejecting fractional values.
pub(crate) fn integer_order(v: f64) -> Result<u32> {
    if v.fract() != 0.0 || !(0.0..=1e6).contains(&v) {
        return Err(Error::DegenerateExponent(format!("moment order {v} is not a nonnegative integer")));
    }
    Ok(v as u32)
}

/// Which non-asymptotic bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    W1,
    W2,
    ExcessRisk,
}

/// Evaluates the right-hand side of the W1, W2 or excess-risk bound at
/// iteration `n` and stepsize `λ`:
///
/// * W1: `C1 e^{−C0 λ n}(E|θ0|^{4(2r+1)} + 1) + C2 √λ`
/// * W2: `C4 e^{−C3 λ n}(E|θ0|^{4(2r+1)} + 1)^{1/2} + C5 λ^{1/4}`
/// * excess risk: `C7 e^{−C6 λ n} + C8 λ^{1/4} + C9/β`
///
/// Stepsizes above `λ_max` are accepted; callers may compare against
/// [`DerivedConstants::lambda_max`] and warn.
pub fn evaluate_bound(kind: BoundKind, n: u64, lambda: f64, ac: &AssumptionConstants, tc: &TheoremConstants) -> LogVal {
    let decay = |rate: LogVal| LogVal::exp(-rate.value() * lambda * n as f64);
    let init = ac.theta0_moment(4.0 * (2.0 * ac.r + 1.0)).add(LogVal::ONE);
    match kind {
        BoundKind::W1 => (tc.c1 * decay(tc.c0) * init).add(tc.c2 * lambda.sqrt()),
        BoundKind::W2 => (tc.c4 * decay(tc.c3) * init.sqrt()).add(tc.c5 * lambda.powf(0.25)),
        BoundKind::ExcessRisk => {
            let main = (tc.c7 * decay(tc.c6)).add(tc.c8 * lambda.powf(0.25));
            let tail = tc.c9 / ac.beta;
            if tail >= 0.0 {
                main.add(LogVal::new(tail))
            } else {
                main.sub(LogVal::new(-tail)).unwrap_or(LogVal::ZERO)
            }
        }
    }
}
