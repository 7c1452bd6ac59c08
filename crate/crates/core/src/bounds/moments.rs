//! Table of data moments `E[(1 + s|X|)^k]` consumed by the constant formulas.

use crate::data::DataLaw;
use crate::error::{Error, Result};
use crate::numeric::LogVal;
use serde::{Deserialize, Serialize};

/// How a moment entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MomentOrigin {
    /// Closed form, quadrature or exact empirical average.
    Analytic,
    /// Monte Carlo with the given standard error.
    MonteCarlo { samples: usize, std_error: f64 },
    /// Supplied by the caller.
    User,
}

/// One entry `E[(1 + s|X|)^k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub s: f64,
    pub k: f64,
    /// `ln E[(1 + s|X|)^k]`.
    pub ln_value: f64,
    pub origin: MomentOrigin,
}

/// Moments needed by the bound formulas, keyed by `(s, k)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    entries: Vec<MomentEntry>,
}

/// Number of Monte-Carlo samples used when a law has no analytic moments.
pub const MC_MOMENT_SAMPLES: usize = 1_000_000;

impl MomentTable {
    /// Empty table.
    pub fn new() -> Self {
        Self::default()
    }

    /// Every `μ_k = E[(1+|X|)^k]` needed for exponents `(r, ρ)` and stepsize
    /// orders `p ≤ p_max`, plus `E[(1+2|X|)^{ρ−1}]`.
    ///
    /// Moments come from the law's analytic provider when it has one, else
    /// from [`MC_MOMENT_SAMPLES`] Monte-Carlo draws seeded with `seed`.
    pub fn for_law(law: &DataLaw, r: f64, rho: f64, p_max: u32, seed: u64) -> Self {
        let mut table = Self::new();
        let p_top = p_max.max((4.0 * r + 2.0).ceil() as u32).max(2);
        let mut orders = vec![(1.0, rho), (1.0, 4.0 * rho), (2.0, rho - 1.0)];
        orders.extend((1..=p_top).map(|j| (1.0, 2.0 * j as f64 * rho)));
        for (s, k) in orders {
            if table.lookup(s, k).is_some() {
                continue;
            }
            let entry = match law.ln_moment(s, k) {
                Some(ln_value) => MomentEntry { s, k, ln_value, origin: MomentOrigin::Analytic },
                None => {
                    let (mean, se) = law.mc_moment(s, k, MC_MOMENT_SAMPLES, seed);
                    MomentEntry {
                        s,
                        k,
                        ln_value: mean.ln(),
                        origin: MomentOrigin::MonteCarlo { samples: MC_MOMENT_SAMPLES, std_error: se },
                    }
                }
            };
            table.entries.push(entry);
        }
        table
    }

    /// Inserts or replaces a user-supplied value of `E[(1 + s|X|)^k]`.
    pub fn insert(&mut self, s: f64, k: f64, value: f64) {
        self.entries.retain(|e| !(e.s == s && e.k == k));
        self.entries.push(MomentEntry { s, k, ln_value: value.ln(), origin: MomentOrigin::User });
    }

    fn lookup(&self, s: f64, k: f64) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.s == s && e.k == k)
    }

    /// `E[(1 + s|X|)^k]` as a log value.
    pub fn get(&self, s: f64, k: f64) -> Result<LogVal> {
        if k == 0.0 {
            return Ok(LogVal::ONE);
        }
        self.lookup(s, k).map(|e| LogVal::from_ln(e.ln_value)).ok_or(Error::MissingMoment {
            kind: if s == 1.0 { "(1+|X|)^k" } else { "(1+2|X|)^k" },
            order: k,
        })
    }

    /// `μ_k = E[(1 + |X|)^k]`.
    pub fn mu(&self, k: f64) -> Result<LogVal> {
        self.get(1.0, k)
    }

    /// All entries.
    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    /// Checks every entry is finite and at least one.
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !e.ln_value.is_finite() || e.ln_value < -1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "moment E[(1+{}|X|)^{}] = exp({}) must be finite and at least 1",
                    e.s, e.k, e.ln_value
                )));
            }
        }
        Ok(())
    }
}
