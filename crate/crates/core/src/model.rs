//! Scenario and decision-variable types shared by every engine in the crate.
//!
//! All quantities live in the normalized system used throughout: chip
//! duration is one, `n0` is the one-sided noise density and `eb` the energy
//! per data bit. The sub-carrier block has `m` sub-carriers in total, `n` of
//! which carry the (unmodulated) chaotic reference and `m - n` carry data.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default total power budget for the joint allocation problem.
pub const DEFAULT_POWER_BUDGET: f64 = 1.0;

/// Global scenario consumed by every formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Sub-carriers per block (`M`).
    pub m: usize,
    /// Spreading factor, chips per bit.
    pub beta: usize,
    /// Number of users sharing the data sub-carriers.
    pub users: usize,
    pub n0: f64,
    pub eb: f64,
}

impl SystemParams {
    pub fn new(m: usize, beta: usize, users: usize, n0: f64, eb: f64) -> Result<Self> {
        let params = SystemParams { m, beta, users, n0, eb };
        match params.violations().first() {
            None => Ok(params),
            Some(v) => Err(invalid(v.to_string())),
        }
    }

    /// Builds a scenario from Eb/N0 in dB; `eb` is derived from `n0`.
    pub fn from_ebn0_db(m: usize, beta: usize, users: usize, ebn0_db: f64, n0: f64) -> Result<Self> {
        let eb = ebn0_db_to_linear(ebn0_db, n0)?;
        Self::new(m, beta, users, n0, eb)
    }

    pub fn ebn0_db(&self) -> f64 {
        10.0 * (self.eb / self.n0).log10()
    }

    pub fn with_eb(self, eb: f64) -> Self {
        SystemParams { eb, ..self }
    }

    pub fn with_users(self, users: usize) -> Self {
        SystemParams { users, ..self }
    }

    /// Highest admissible number of reference sub-carriers.
    pub fn max_refs(&self) -> usize {
        self.m.saturating_sub(1)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.m < 2 {
            out.push(Violation::TooFewSubcarriers);
        }
        if self.beta < 1 {
            out.push(Violation::ZeroSpreading);
        }
        if self.users < 1 {
            out.push(Violation::NoUsers);
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            out.push(Violation::NoiseDensity);
        }
        if !(self.eb.is_finite() && self.eb > 0.0) {
            out.push(Violation::BitEnergy);
        }
        out
    }
}

/// Number of reference sub-carriers `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubcarrierAlloc(pub usize);

impl SubcarrierAlloc {
    pub fn refs(self) -> usize {
        self.0
    }
}

/// Linear power coefficients for data (`a`) and reference (`b`) sub-carriers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAlloc {
    pub a: f64,
    pub b: f64,
}

impl PowerAlloc {
    pub const UNIT: PowerAlloc = PowerAlloc { a: 1.0, b: 1.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub sub: SubcarrierAlloc,
    pub pow: PowerAlloc,
}

impl Allocation {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        Allocation { sub: SubcarrierAlloc(n), pow: PowerAlloc { a, b } }
    }

    /// Equal-power allocation used by the sub-carrier-only scheme.
    pub fn equal_power(n: usize) -> Self {
        Allocation { sub: SubcarrierAlloc(n), pow: PowerAlloc::UNIT }
    }

    pub fn n(&self) -> usize {
        self.sub.0
    }

    pub fn a(&self) -> f64 {
        self.pow.a
    }

    pub fn b(&self) -> f64 {
        self.pow.b
    }

    /// Total power over the block, `(M - N) a + N b`.
    pub fn power_sum(&self, m: usize) -> f64 {
        let n = self.n() as f64;
        (m as f64 - n) * self.pow.a + n * self.pow.b
    }
}

/// A single broken invariant reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewSubcarriers,
    ZeroSpreading,
    NoUsers,
    NoiseDensity,
    BitEnergy,
    NoReferences,
    RefsNotBelowM { n: usize, m: usize },
    DataPower(f64),
    RefPower(f64),
    OverBudget { power_sum: f64, budget: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewSubcarriers => write!(f, "M >= 2"),
            Violation::ZeroSpreading => write!(f, "beta >= 1"),
            Violation::NoUsers => write!(f, "P >= 1"),
            Violation::NoiseDensity => write!(f, "N0 > 0 and finite"),
            Violation::BitEnergy => write!(f, "Eb > 0 and finite"),
            Violation::NoReferences => write!(f, "N >= 1"),
            Violation::RefsNotBelowM { n, m } => write!(f, "N < M (N={n}, M={m})"),
            Violation::DataPower(a) => write!(f, "a > 0 and finite (a={a})"),
            Violation::RefPower(b) => write!(f, "b > 0 and finite (b={b})"),
            Violation::OverBudget { power_sum, budget } => {
                write!(f, "power_sum <= C_T ({power_sum} > {budget})")
            }
        }
    }
}

/// Converts Eb/N0 in dB into the bit energy for a given noise density.
pub fn ebn0_db_to_linear(ebn0_db: f64, n0: f64) -> Result<f64> {
    if !ebn0_db.is_finite() {
        return Err(invalid(format!("Eb/N0 must be finite, got {ebn0_db}")));
    }
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(invalid(format!("N0 must be positive and finite, got {n0}")));
    }
    Ok(n0 * 10f64.powf(ebn0_db / 10.0))
}

/// Lists every invariant the pair breaks; an empty list means valid.
///
/// `budget` is the total-power cap `C_T`; pass `None` when no budget is in
/// force (the equal-power scheme).
pub fn validate(params: &SystemParams, alloc: &Allocation, budget: Option<f64>) -> Vec<Violation> {
    let mut out = params.violations();
    let n = alloc.n();
    if n < 1 {
        out.push(Violation::NoReferences);
    }
    if n >= params.m {
        out.push(Violation::RefsNotBelowM { n, m: params.m });
    }
    let (a, b) = (alloc.a(), alloc.b());
    if !(a.is_finite() && a > 0.0) {
        out.push(Violation::DataPower(a));
    }
    if !(b.is_finite() && b > 0.0) {
        out.push(Violation::RefPower(b));
    }
    if let Some(budget) = budget {
        let power_sum = alloc.power_sum(params.m);
        // NaN power sums were already reported through a / b.
        if power_sum > budget {
            out.push(Violation::OverBudget { power_sum, budget });
        }
    }
    out
}

/// Validates and converts the violation list into an error.
pub fn ensure_valid(params: &SystemParams, alloc: &Allocation, budget: Option<f64>) -> Result<()> {
    let v = validate(params, alloc, budget);
    if v.is_empty() {
        Ok(())
    } else {
        let msg: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(invalid(msg.join("; ")))
    }
}
