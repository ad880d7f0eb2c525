//! Closed-form optimal number of reference sub-carriers.
//!
//! Setting the derivative of [`objective_sa`] to zero and clearing the
//! positive denominator `2 Eb^2 N^2 (M-N)^3` leaves the cubic
//!
//! ```text
//! A N^3 + B N^2 + C N + D = 0
//! A = -2 Eb (P N0 + 2P - 2)
//! B =  2 Eb (P M N0 + 2 P M - 2M - 2 P N0)
//! C =  3 M N0 (2 P Eb + beta N0)
//! D = -M^2 N0 (2 P Eb + beta N0)
//! ```
//!
//! which is solved by Cardano's formula when it has one real root and by the
//! trigonometric method when it has three. The integer optimum is picked
//! among the floor/ceil neighbours of every root in `(0, M)` and the two
//! endpoints, which makes it exact whenever the roots are.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{objective_sa, objective_sa_unchecked};
use crate::error::{invalid, Result};
use crate::model::{SubcarrierAlloc, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }

    fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.a * x + 2.0 * self.b) * x + self.c
    }

    /// Shift that removes the quadratic term: `N = X + shift`.
    pub fn shift(&self) -> f64 {
        -self.b / (3.0 * self.a)
    }

    pub fn depressed(&self) -> DepressedCubic {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let zeta = (3.0 * a * c - b * b) / (3.0 * a * a);
        let xi = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
        DepressedCubic::new(zeta, xi)
    }

    /// Real roots in ascending order, each refined by Newton steps on the
    /// undepressed polynomial.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut roots = real_roots(&self.depressed(), self.shift());
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let slope = self.derivative(*r);
                if slope == 0.0 {
                    break;
                }
                let next = *r - self.eval(*r) / slope;
                if !next.is_finite() || self.eval(next).abs() >= self.eval(*r).abs() {
                    break;
                }
                *r = next;
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// `|p(r)|` relative to the largest monomial magnitude at `r`.
    pub fn relative_residual(&self, r: f64) -> f64 {
        let scale = [self.a * r * r * r, self.b * r * r, self.c * r, self.d]
            .iter()
            .fold(0.0f64, |acc, t| acc.max(t.abs()));
        self.eval(r).abs() / scale
    }
}

/// `X^3 + zeta X + xi = 0` with its discriminant `delta = zeta^3/27 + xi^2/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepressedCubic {
    pub zeta: f64,
    pub xi: f64,
    pub delta: f64,
}

impl DepressedCubic {
    pub fn new(zeta: f64, xi: f64) -> Self {
        DepressedCubic { zeta, xi, delta: zeta * zeta * zeta / 27.0 + xi * xi / 4.0 }
    }
}

/// Stationarity cubic of the equal-power objective.
pub fn cubic_coeffs(params: &SystemParams) -> CubicCoeffs {
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let common = 2.0 * p * eb + beta * n0;
    CubicCoeffs {
        a: -2.0 * eb * (p * n0 + 2.0 * p - 2.0),
        b: 2.0 * eb * (p * m * n0 + 2.0 * p * m - 2.0 * m - 2.0 * p * n0),
        c: 3.0 * m * n0 * common,
        d: -m * m * n0 * common,
    }
}

pub fn depressed(params: &SystemParams) -> DepressedCubic {
    cubic_coeffs(params).depressed()
}

/// `(zeta, xi)` evaluated from the printed closed forms, kept for the errata
/// report. They disagree with [`depressed`]; nothing else uses them.
pub fn printed_depressed(params: &SystemParams) -> (f64, f64) {
    let m = params.m as f64;
    let p = params.users as f64;
    let beta = params.beta as f64;
    let (n0, eb) = (params.n0, params.eb);
    let k = p * m * (n0 + 2.0) - 2.0 * m - 2.0 * p * n0;
    let l = p * n0 + 2.0 * p - 2.0;
    let zeta = -(k * k) / (3.0 * l * l) + 3.0 * m * n0 * (2.0 * p * eb + beta * n0) / (2.0 * eb * l);
    let xi = k * k * k / (27.0 * l * l * l) + k / (3.0 * l) - k / (2.0 * eb * l);
    (zeta, xi)
}

/// Real roots of a depressed cubic, each moved back by `shift`.
///
/// A positive discriminant gives one root through real cube roots. Otherwise
/// all three roots are real and come from the trigonometric form; the
/// degenerate `zeta = 0` case collapses to the triple root `-cbrt(xi)`.
pub fn real_roots(dc: &DepressedCubic, shift: f64) -> Vec<f64> {
    let DepressedCubic { zeta, xi, delta } = *dc;
    if delta > 0.0 {
        // Take the cube root that avoids cancellation, then recover the
        // partner from u v = -zeta / 3.
        let s = delta.sqrt();
        let w = if xi <= 0.0 { -xi / 2.0 + s } else { -xi / 2.0 - s };
        let u = w.cbrt();
        let v = if u != 0.0 { -zeta / (3.0 * u) } else { 0.0 };
        return vec![u + v + shift];
    }
    if zeta == 0.0 {
        return vec![-xi.cbrt() + shift];
    }
    let r = 2.0 * (-zeta / 3.0).sqrt();
    let arg = (3.0 * xi / (2.0 * zeta) * (-3.0 / zeta).sqrt()).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots: Vec<f64> = (0..3).map(|j| r * (phi - 2.0 * PI * j as f64 / 3.0).cos() + shift).collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Continuous stationary points of the objective inside `(0, M)`.
pub fn interior_stationary_points(params: &SystemParams) -> Vec<f64> {
    let m = params.m as f64;
    cubic_coeffs(params).real_roots().into_iter().filter(|&r| r > 0.0 && r < m).collect()
}

/// Optimal number of references from the closed-form cubic roots.
pub fn optimal_n_closed_form(params: &SystemParams) -> Result<SubcarrierAlloc> {
    check(params)?;
    let hi = params.max_refs();
    let mut candidates = vec![1, hi];
    for r in interior_stationary_points(params) {
        for k in [r.floor(), r.ceil()] {
            let k = k as usize;
            if (1..=hi).contains(&k) {
                candidates.push(k);
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    Ok(SubcarrierAlloc(argmin(params, candidates)))
}

/// Exhaustive argmin over `1..M`; the verification oracle.
pub fn optimal_n_bruteforce(params: &SystemParams) -> Result<SubcarrierAlloc> {
    check(params)?;
    Ok(SubcarrierAlloc(argmin(params, 1..=params.max_refs())))
}

fn check(params: &SystemParams) -> Result<()> {
    match params.violations().first() {
        Some(v) => Err(invalid(v.to_string())),
        None => Ok(()),
    }
}

// Ties go to the smaller N: candidates arrive ascending and only a strict
// improvement replaces the incumbent.
fn argmin(params: &SystemParams, candidates: impl IntoIterator<Item = usize>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for n in candidates {
        let v = objective_sa_unchecked(params, n as f64);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((n, v));
        }
    }
    best.map(|(n, _)| n).expect("candidate set always holds N = 1")
}

/// Objective at the optimum, for reporting.
pub fn optimal_objective(params: &SystemParams) -> Result<(SubcarrierAlloc, f64)> {
    let n = optimal_n_closed_form(params)?;
    Ok((n, objective_sa(params, n.0)?))
}
