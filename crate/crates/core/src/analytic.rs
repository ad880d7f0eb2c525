//! Closed-form BER models under the Gaussian approximation.
//!
//! The equal-power (sub-carrier allocated) scheme is scored by
//! [`objective_sa`], the reciprocal of the squared erfc argument. The joint
//! power scheme is scored by the rational function `U = A / B` returned by
//! [`ratio_parts`]; its BER is `erfc(sqrt(U)) / 2`. Both are evaluated exactly
//! as written, including terms that do not reduce into one another when
//! `a = b = 1` (see [`psa_printed_bracket`] and the errata report).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ensure_valid, Allocation, SystemParams};

/// BER values below this clamp to exactly zero.
pub const BER_FLOOR: f64 = 1e-300;

/// Numerator and denominator of the joint-allocation objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioParts {
    pub numerator: f64,
    pub denominator: f64,
}

impl RatioParts {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.denominator
    }
}

/// `erfc(x) / 2` with the tiny-value clamp applied.
pub fn half_erfc(x: f64) -> f64 {
    let p = 0.5 * libm::erfc(x);
    if p < BER_FLOOR {
        0.0
    } else {
        p
    }
}

fn check_refs(params: &SystemParams, n: usize) -> Result<()> {
    let v = params.violations();
    if let Some(first) = v.first() {
        return Err(invalid(first.to_string()));
    }
    if n < 1 || n >= params.m {
        return Err(invalid(format!("N must lie in 1..={} (got {n})", params.m - 1)));
    }
    Ok(())
}

/// Objective of the equal-power scheme; smaller is better.
///
/// `(N+1)/N * P M N0 / ((M-N) Eb) + beta M^2 N0^2 / (2 N (M-N)^2 Eb^2)
///  + 2 (P-1) M / ((M-N) Eb)`
pub fn objective_sa(params: &SystemParams, n: usize) -> Result<f64> {
    check_refs(params, n)?;
    Ok(objective_sa_unchecked(params, n as f64))
}

/// Same as [`objective_sa`] for a continuous `n` in `(0, M)`, without checks.
pub fn objective_sa_unchecked(params: &SystemParams, n: f64) -> f64 {
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let data = m - n;
    (n + 1.0) / n * p * m * n0 / (data * eb)
        + beta * m * m * n0 * n0 / (2.0 * n * data * data * eb * eb)
        + 2.0 * (p - 1.0) * m / (data * eb)
}

pub fn ber_sa(params: &SystemParams, n: usize) -> Result<f64> {
    let obj = objective_sa(params, n)?;
    Ok(half_erfc(obj.sqrt().recip()))
}

/// Numerator `A` and denominator `B` of the joint objective `U = A / B`.
pub fn ratio_parts(params: &SystemParams, alloc: &Allocation) -> Result<RatioParts> {
    ensure_valid(params, alloc, None)?;
    Ok(ratio_parts_unchecked(params, alloc.n() as f64, alloc.a(), alloc.b()))
}

/// [`ratio_parts`] for raw `(n, a, b)`; `n` may be fractional.
pub fn ratio_parts_unchecked(params: &SystemParams, n: f64, a: f64, b: f64) -> RatioParts {
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let data = m - n;
    let power_sum = data * a + n * b;
    let numerator = 2.0 * n * a * b * data * data * eb * eb;
    let denominator = data * eb * power_sum
        * (2.0 * (a * p + b) * (n + 1.0) * n0 + 4.0 * a * b * (p - 1.0) * n)
        + beta * n0 * n0 * power_sum * power_sum;
    RatioParts { numerator, denominator }
}

pub fn ratio_u(params: &SystemParams, alloc: &Allocation) -> Result<f64> {
    Ok(ratio_parts(params, alloc)?.ratio())
}

pub fn ber_psa(params: &SystemParams, alloc: &Allocation) -> Result<f64> {
    Ok(half_erfc(ratio_u(params, alloc)?.sqrt()))
}

/// Dinkelbach auxiliary `V = A - q B`.
pub fn dinkelbach_v(params: &SystemParams, alloc: &Allocation, q: f64) -> Result<f64> {
    if !q.is_finite() {
        return Err(invalid(format!("q must be finite, got {q}")));
    }
    let parts = ratio_parts(params, alloc)?;
    Ok(parts.numerator - q * parts.denominator)
}

#[inline]
pub(crate) fn v_unchecked(params: &SystemParams, n: f64, a: f64, b: f64, q: f64) -> f64 {
    let parts = ratio_parts_unchecked(params, n, a, b);
    parts.numerator - q * parts.denominator
}

/// The three addends of the bracketed sum in the simplified joint-scheme BER,
/// as printed: `(b+aP)/(ab) (N+1)/N N0 S / ((M-N) Eb)`,
/// `beta N0^2 S^2 / (2 a b N (M-N)^2 Eb^2)` and `2 (P-1) / ((M-N) Eb)` with
/// `S = (M-N) a + N b`. The third addend lacks the factor `S` that `1/U`
/// carries, so the two forms only agree for a single user.
pub fn psa_printed_bracket(params: &SystemParams, alloc: &Allocation) -> Result<[f64; 3]> {
    ensure_valid(params, alloc, None)?;
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let (n, a, b) = (alloc.n() as f64, alloc.a(), alloc.b());
    let data = m - n;
    let s = alloc.power_sum(params.m);
    Ok([
        (b + a * p) / (a * b) * (n + 1.0) / n * n0 * s / (data * eb),
        beta * n0 * n0 * s * s / (2.0 * a * b * n * data * data * eb * eb),
        2.0 * (p - 1.0) / (data * eb),
    ])
}

/// The three addends of [`objective_sa`], in the same order.
pub fn objective_sa_terms(params: &SystemParams, n: usize) -> Result<[f64; 3]> {
    check_refs(params, n)?;
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let nf = n as f64;
    let data = m - nf;
    Ok([
        (nf + 1.0) / nf * p * m * n0 / (data * eb),
        beta * m * m * n0 * n0 / (2.0 * nf * data * data * eb * eb),
        2.0 * (p - 1.0) * m / (data * eb),
    ])
}
