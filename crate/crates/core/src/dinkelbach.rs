//! Joint sub-carrier and power allocation by Dinkelbach's parametric method.
//!
//! Maximizing `U = A / B` over `(a, b, N)` is replaced by finding the root
//! `q*` of `F(q) = max V(a, b, N, q)` with `V = A - q B`. `F` is strictly
//! decreasing because `B > 0`, positive at `q = 0` and negative for large
//! `q`, so plain bisection on its sign converges.
//!
//! Two inner maximizers are available. [`InnerMethod::Numeric`] searches
//! every `N` on a log grid, refines by exact coordinate ascent (`V` is a
//! concave quadratic in `a` for fixed `b`, and vice versa) and scans the
//! budget face. [`InnerMethod::KktVerbatim`] iterates the printed stationary
//! updates for `a`, `b` and the quadratic in `N`; those expressions do not
//! coincide with the true stationarity conditions, so any non-physical,
//! infeasible or non-converged iterate falls back to the numeric search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ratio_parts_unchecked, v_unchecked};
use crate::cardano::optimal_n_closed_form;
use crate::error::{invalid, Error, Result};
use crate::model::{validate, Allocation, SystemParams, DEFAULT_POWER_BUDGET};

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_Q_HI: f64 = 1.0;
/// Lower edge of the power box as a fraction of the budget.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-4;
const MAX_DOUBLINGS: u32 = 128;
const MAX_BISECTIONS: usize = 200;
const KKT_SWEEPS: usize = 200;
const KKT_DAMPING: f64 = 0.5;
const KKT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMethod {
    KktVerbatim,
    #[default]
    Numeric,
}

impl std::fmt::Display for InnerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InnerMethod::KktVerbatim => "kkt-verbatim",
            InnerMethod::Numeric => "numeric",
        })
    }
}

/// Feasible set for the power coefficients: `floor <= a, b <= budget` and
/// `(M - N) a + N b <= budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBox {
    pub budget: f64,
    pub floor: f64,
}

impl PowerBox {
    pub fn new(budget: f64) -> Self {
        PowerBox { budget, floor: DEFAULT_FLOOR_FRACTION * budget }
    }

    fn check(&self, m: usize) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(invalid(format!("power budget must be positive, got {}", self.budget)));
        }
        if !(self.floor > 0.0 && self.floor * m as f64 <= self.budget) {
            return Err(invalid(format!("power floor {} leaves no feasible allocation", self.floor)));
        }
        Ok(())
    }

    /// Largest admissible `a` for a given `b`.
    fn a_max(&self, m: usize, n: usize, b: f64) -> f64 {
        ((self.budget - n as f64 * b) / (m - n) as f64).min(self.budget)
    }

    fn b_max(&self, m: usize, n: usize, a: f64) -> f64 {
        ((self.budget - (m - n) as f64 * a) / n as f64).min(self.budget)
    }

    fn feasible(&self, m: usize, n: usize, a: f64, b: f64) -> bool {
        a >= self.floor
            && b >= self.floor
            && a <= self.budget
            && b <= self.budget
            && (m - n) as f64 * a + n as f64 * b <= self.budget * (1.0 + 1e-12)
    }
}

impl Default for PowerBox {
    fn default() -> Self {
        PowerBox::new(DEFAULT_POWER_BUDGET)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachConfig {
    pub power: PowerBox,
    pub epsilon: f64,
    pub q_hi_init: f64,
    pub method: InnerMethod,
}

impl Default for DinkelbachConfig {
    fn default() -> Self {
        DinkelbachConfig {
            power: PowerBox::default(),
            epsilon: DEFAULT_EPSILON,
            q_hi_init: DEFAULT_Q_HI,
            method: InnerMethod::Numeric,
        }
    }
}

impl DinkelbachConfig {
    pub fn with_budget(budget: f64) -> Self {
        DinkelbachConfig { power: PowerBox::new(budget), ..Default::default() }
    }
}

/// One evaluation of `F(q)` during bracketing or bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub q: f64,
    pub f: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachResult {
    pub q_star: f64,
    pub alloc_star: Allocation,
    /// `V` at the returned point and `q_star`.
    pub v_residual: f64,
    pub outer_iterations: usize,
    /// Method that produced the final allocation.
    pub inner_method: InnerMethod,
    /// Inner solves where the KKT iteration had to fall back.
    pub fallbacks: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

impl DinkelbachResult {
    /// Checks that `F` decreases along the trace and that every `q` with
    /// `F > 0` lies below every `q` with `F < 0`.
    pub fn sign_structure_holds(&self) -> bool {
        let mut pts = self.trace.clone();
        pts.sort_by(|x, y| x.q.total_cmp(&y.q));
        let decreasing = pts.windows(2).all(|w| w[0].q == w[1].q || w[1].f < w[0].f);
        let last_pos = pts.iter().filter(|p| p.f > 0.0).map(|p| p.q).fold(f64::NEG_INFINITY, f64::max);
        let first_neg = pts.iter().filter(|p| p.f < 0.0).map(|p| p.q).fold(f64::INFINITY, f64::min);
        decreasing && last_pos < first_neg && last_pos <= self.q_star && self.q_star <= first_neg
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::NonPhysicalUpdate("q must be positive"));
    }
    Ok(())
}

fn physical(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::NonPhysicalUpdate(what))
    }
}

/// Printed stationary update for the data power `a` given `b`, `N`, `q`.
pub fn update_a(params: &SystemParams, b: f64, n: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    let (m, p, beta, n0, eb) = scalars(params);
    let nf = n as f64;
    let d = m - nf;
    let num = nf * b * eb * eb * d * d
        - q * m * (nf + 1.0) * d * eb * n0 * b
        - q * beta * n0 * n0 * nf * b * m
        - 2.0 * q * nf * nf * b * b * eb * (p - 1.0) * d;
    let den = 2.0 * q * (nf + 1.0) * d * d * eb * n0 * p
        + q * beta * n0 * n0 * d * d
        + 4.0 * q * d * d * nf * b * eb * (p - 1.0);
    physical(num / den, "update_a")
}

/// Printed stationary update for the reference power `b` given `a`, `N`, `q`.
pub fn update_b(params: &SystemParams, a: f64, n: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    let (m, p, beta, n0, eb) = scalars(params);
    let nf = n as f64;
    let d = m - nf;
    let num = d
        * a
        * (nf * d * eb * eb + q * (nf + 1.0) * eb * n0 * (nf - p * nf - m)
            - q * beta * n0 * n0 * nf
            - 2.0 * q * nf * a * eb * (p - 1.0) * d);
    let den = q * beta * n0 * n0 * nf * nf + q * nf * ((nf + 1.0) * d * eb * n0 + 4.0 * nf * a * eb * (p - 1.0) * d);
    physical(num / den, "update_b")
}

/// Printed coefficients `[A1, A2, A3]` of the quadratic in `N`.
pub fn kkt_quadratic_coeffs(params: &SystemParams, a: f64, b: f64, q: f64) -> [f64; 3] {
    let (m, p, beta, n0, eb) = scalars(params);
    let ab = a * b;
    let a1 = 3.0 * (ab * eb * eb + q * (a - b) * ((a * p + b) * eb * n0 - 2.0 * ab * (p - 1.0) * eb));
    let a2 = -2.0 * m * ab * eb * eb + 2.0 * q * (a * p + b) * eb * n0 * (2.0 * m * a - m * b + a + b)
        - q * beta * n0 * n0 * (a + b) * (a + b)
        + 4.0 * ab * eb * (p - 1.0) * q * m * (a - b);
    // The printed "(Ma - 2b - 2b)" is kept as is.
    let a3 = m
        * (ab * eb * eb + q * (a * p + b) * eb * n0 * (m * a - 2.0 * b - 2.0 * b) + q * beta * n0 * n0 * a * (a + b)
            - 2.0 * a * a * b * eb * (p - 1.0) * q * m);
    [a1, a2, a3]
}

/// Integer candidates for `N` from `A1 N^2 + A2 N + A3 = 0`.
pub fn solve_n_quadratic(params: &SystemParams, a: f64, b: f64, q: f64) -> Result<Vec<usize>> {
    for (x, name) in [(a, "a"), (b, "b"), (q, "q")] {
        if !(x.is_finite() && x > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {x}")));
        }
    }
    let [a1, a2, a3] = kkt_quadratic_coeffs(params, a, b, q);
    Ok(quadratic_candidates(params.m, a1, a2, a3))
}

/// Floor/ceil of every real root in `(0, m)`, plus the endpoints `1` and
/// `m - 1`, in ascending order.
pub fn quadratic_candidates(m: usize, a1: f64, a2: f64, a3: f64) -> Vec<usize> {
    let mut roots = Vec::new();
    if a1 != 0.0 {
        let disc = a2 * a2 - 4.0 * a1 * a3;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // Stable pair: q = -(a2 + sign(a2) s) / 2.
            let t = -0.5 * (a2 + if a2 >= 0.0 { s } else { -s });
            if t != 0.0 {
                roots.push(t / a1);
                roots.push(a3 / t);
            } else {
                roots.push(0.0);
            }
        }
    } else if a2 != 0.0 {
        roots.push(-a3 / a2);
    }
    let hi = m - 1;
    let mut out = vec![1, hi];
    for r in roots.into_iter().filter(|r| r.is_finite() && *r > 0.0 && *r < m as f64) {
        for k in [r.floor() as usize, r.ceil() as usize] {
            if (1..=hi).contains(&k) {
                out.push(k);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn scalars(params: &SystemParams) -> (f64, f64, f64, f64, f64) {
    (params.m as f64, params.users as f64, params.beta as f64, params.n0, params.eb)
}

/// Maximizes `f` on `[lo, hi]` assuming it is a quadratic: the parabola
/// through the end and mid points is exact in that case. Falls back to
/// golden-section search when the fit is not concave.
fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let mid = 0.5 * (lo + hi);
    let (f0, f1, f2) = (f(lo), f(mid), f(hi));
    let h = 0.5 * (hi - lo);
    let curv = (f0 - 2.0 * f1 + f2) / (2.0 * h * h);
    let mut best = if f0 >= f2 { (lo, f0) } else { (hi, f2) };
    if f1 > best.1 {
        best = (mid, f1);
    }
    if curv < 0.0 {
        let slope = (f2 - f0) / (2.0 * h);
        let x = (mid - slope / (2.0 * curv)).clamp(lo, hi);
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    } else {
        let g = golden_max(&f, lo, hi, 80);
        if g.1 > best.1 {
            best = g;
        }
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo * (ratio * (i as f64 / (points - 1) as f64)).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    a: f64,
    b: f64,
    v: f64,
}

fn better(x: Candidate, y: Candidate) -> Candidate {
    if y.v > x.v {
        y
    } else {
        x
    }
}

const START_GRID: usize = 16;
const STARTS: usize = 3;
const ASCENT_SWEEPS: usize = 400;
const FACE_SCAN: usize = 64;

/// Best `(a, b)` for a fixed `N` at parameter `q`.
fn maximize_for_n(params: &SystemParams, power: &PowerBox, n: usize, q: f64) -> Candidate {
    let m = params.m;
    let nf = n as f64;
    let v = |a: f64, b: f64| v_unchecked(params, nf, a, b, q);

    // Coarse log grid, keeping the top few feasible points as starts.
    let grid = log_grid(power.floor, power.budget, START_GRID);
    let mut starts: Vec<Candidate> = Vec::new();
    for &a in &grid {
        for &b in &grid {
            if power.feasible(m, n, a, b) {
                starts.push(Candidate { a, b, v: v(a, b) });
            }
        }
    }
    starts.sort_by(|x, y| y.v.total_cmp(&x.v));
    starts.truncate(STARTS);
    let uniform = power.budget / m as f64;
    starts.push(Candidate { a: uniform, b: uniform, v: v(uniform, uniform) });

    let mut best = starts[0];
    for s in starts {
        best = better(best, coordinate_ascent(params, power, n, q, s));
    }
    better(best, budget_face(params, power, n, q))
}

fn coordinate_ascent(params: &SystemParams, power: &PowerBox, n: usize, q: f64, start: Candidate) -> Candidate {
    let m = params.m;
    let nf = n as f64;
    let mut cur = start;
    for _ in 0..ASCENT_SWEEPS {
        let prev = cur;
        let hi_a = power.a_max(m, n, cur.b).max(power.floor);
        let (a, va) = maximize_1d(|a| v_unchecked(params, nf, a, cur.b, q), power.floor, hi_a);
        if va >= cur.v {
            cur = Candidate { a, b: cur.b, v: va };
        }
        let hi_b = power.b_max(m, n, cur.a).max(power.floor);
        let (b, vb) = maximize_1d(|b| v_unchecked(params, nf, cur.a, b, q), power.floor, hi_b);
        if vb >= cur.v {
            cur = Candidate { a: cur.a, b, v: vb };
        }
        let moved = ((cur.a - prev.a) / prev.a).abs().max(((cur.b - prev.b) / prev.b).abs());
        if moved < 1e-13 {
            break;
        }
    }
    cur
}

/// Searches the face `(M - N) a + N b = budget` by a scan plus golden section.
fn budget_face(params: &SystemParams, power: &PowerBox, n: usize, q: f64) -> Candidate {
    let m = params.m;
    let (d, nf) = ((m - n) as f64, n as f64);
    let lo = power.floor.max((power.budget - nf * power.budget) / d);
    let hi = power.a_max(m, n, power.floor);
    let on_face = |a: f64| {
        let b = ((power.budget - d * a) / nf).clamp(power.floor, power.budget);
        (b, v_unchecked(params, nf, a, b, q))
    };
    if hi <= lo {
        let (b, v) = on_face(lo);
        return Candidate { a: lo, b, v };
    }
    let grid = log_grid(lo, hi, FACE_SCAN);
    let (idx, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &a)| (i, on_face(a).1))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let left = grid[idx.saturating_sub(1)];
    let right = grid[(idx + 1).min(grid.len() - 1)];
    let (a, _) = golden_max(&|a| on_face(a).1, left, right, 90);
    let (b, v) = on_face(a);
    let cand = Candidate { a, b, v };
    let (b0, v0) = on_face(grid[idx]);
    better(Candidate { a: grid[idx], b: b0, v: v0 }, cand)
}

fn numeric_inner(params: &SystemParams, power: &PowerBox, q: f64) -> (Allocation, f64) {
    let per_n: Vec<(usize, Candidate)> =
        (1..params.m).into_par_iter().map(|n| (n, maximize_for_n(params, power, n, q))).collect();
    // Smaller N wins ties: only a strict improvement replaces the incumbent.
    let (n, c) = per_n
        .into_iter()
        .reduce(|acc, x| if x.1.v > acc.1.v { x } else { acc })
        .expect("M >= 2 gives at least one N");
    (Allocation::new(n, c.a, c.b), c.v)
}

fn kkt_inner(params: &SystemParams, power: &PowerBox, q: f64) -> Option<(Allocation, f64)> {
    let m = params.m;
    let mut n = optimal_n_closed_form(params).ok()?.0;
    let uniform = power.budget / m as f64;
    let (mut a, mut b) = (uniform, uniform);
    for _ in 0..KKT_SWEEPS {
        let a_new = update_a(params, b, n, q).ok()?;
        let a_next = KKT_DAMPING * a + (1.0 - KKT_DAMPING) * a_new;
        let b_new = update_b(params, a_next, n, q).ok()?;
        let b_next = KKT_DAMPING * b + (1.0 - KKT_DAMPING) * b_new;
        let cands = solve_n_quadratic(params, a_next, b_next, q).ok()?;
        let n_next = cands
            .into_iter()
            .map(|k| (k, v_unchecked(params, k as f64, a_next, b_next, q)))
            .reduce(|acc, x| if x.1 > acc.1 { x } else { acc })?
            .0;
        let change = ((a_next - a) / a).abs().max(((b_next - b) / b).abs());
        let settled = change < KKT_TOL && n_next == n;
        a = a_next;
        b = b_next;
        n = n_next;
        if settled {
            if !power.feasible(m, n, a, b) {
                return None;
            }
            return Some((Allocation::new(n, a, b), v_unchecked(params, n as f64, a, b, q)));
        }
    }
    None
}

/// Maximizes `V(., q)` over the feasible set. Returns the allocation, its
/// `V`, and the method that actually produced it.
pub fn inner_maximize(
    params: &SystemParams,
    q: f64,
    power: &PowerBox,
    method: InnerMethod,
) -> Result<(Allocation, f64, InnerMethod)> {
    check_params(params)?;
    power.check(params.m)?;
    if !(q.is_finite() && q >= 0.0) {
        return Err(invalid(format!("q must be non-negative, got {q}")));
    }
    if method == InnerMethod::KktVerbatim && q > 0.0 {
        if let Some((alloc, v)) = kkt_inner(params, power, q) {
            return Ok((alloc, v, InnerMethod::KktVerbatim));
        }
    }
    let (alloc, v) = numeric_inner(params, power, q);
    Ok((alloc, v, InnerMethod::Numeric))
}

fn check_params(params: &SystemParams) -> Result<()> {
    match params.violations().first() {
        Some(v) => Err(invalid(v.to_string())),
        None => Ok(()),
    }
}

/// Bisection on `q` for the root of `F(q) = max V`.
pub fn bisection_solve(params: &SystemParams, config: &DinkelbachConfig) -> Result<DinkelbachResult> {
    check_params(params)?;
    config.power.check(params.m)?;
    if config.epsilon.is_nan() || config.epsilon <= 0.0 {
        return Err(invalid("epsilon must be positive"));
    }
    if !(config.q_hi_init.is_finite() && config.q_hi_init > 0.0) {
        return Err(invalid("initial upper q must be positive"));
    }

    let mut trace = Vec::new();
    let mut fallbacks = 0usize;
    let mut eval = |q: f64, trace: &mut Vec<TracePoint>| -> Result<(Allocation, f64, InnerMethod)> {
        let out = inner_maximize(params, q, &config.power, config.method)?;
        if config.method == InnerMethod::KktVerbatim && out.2 == InnerMethod::Numeric {
            fallbacks += 1;
        }
        trace.push(TracePoint { q, f: out.1, n: out.0.n() });
        Ok(out)
    };

    let finish = |q: f64, (alloc, v, method): (Allocation, f64, InnerMethod), iters: usize, converged: bool,
                  trace: Vec<TracePoint>, fallbacks: usize| DinkelbachResult {
        q_star: q,
        alloc_star: alloc,
        v_residual: v,
        outer_iterations: iters,
        inner_method: method,
        fallbacks,
        converged,
        trace,
    };

    // Step 1: bracket. F(0) = max A > 0.
    let mut q_lo = 0.0;
    let at_zero = eval(0.0, &mut trace)?;
    debug_assert!(at_zero.1 > 0.0);
    let mut q_hi = config.q_hi_init;
    let mut doublings = 0;
    loop {
        let out = eval(q_hi, &mut trace)?;
        if out.1.abs() < config.epsilon {
            let it = trace.len();
            return Ok(finish(q_hi, out, it, true, trace, fallbacks));
        }
        if out.1 < 0.0 {
            break;
        }
        q_lo = q_hi;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::UnboundedRatio(MAX_DOUBLINGS));
        }
        q_hi *= 2.0;
    }

    // Steps 2-3: bisect on the sign of F.
    let mut last = None;
    for iter in 1..=MAX_BISECTIONS {
        let q = 0.5 * (q_lo + q_hi);
        let out = eval(q, &mut trace)?;
        if out.1.abs() < config.epsilon {
            return Ok(finish(q, out, iter, true, trace, fallbacks));
        }
        if out.1 > 0.0 {
            q_lo = q;
        } else {
            q_hi = q;
        }
        last = Some((q, out));
    }
    let (q, out) = last.expect("at least one bisection step");
    Ok(finish(q, out, MAX_BISECTIONS, false, trace, fallbacks))
}

/// Grid definition for [`grid_oracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per power axis, log-spaced over `[lo_fraction * budget, budget]`.
    pub points: usize,
    pub lo_fraction: f64,
    /// Values of `N` to scan; `None` means `1..M`.
    pub refs: Option<Vec<usize>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 50, lo_fraction: DEFAULT_FLOOR_FRACTION, refs: None }
    }
}

impl GridSpec {
    /// Doubles the resolution; the refined grid contains every old point.
    pub fn refined(&self) -> GridSpec {
        GridSpec { points: 2 * (self.points - 1) + 1, ..self.clone() }
    }

    pub fn axis(&self, budget: f64) -> Vec<f64> {
        log_grid(self.lo_fraction * budget, budget, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub alloc: Allocation,
    pub u: f64,
}

/// Exhaustive feasible argmax of `U` over the grid. Ties keep the first
/// point in (N, a, b) scan order.
pub fn grid_oracle(params: &SystemParams, budget: f64, spec: &GridSpec) -> Result<GridOptimum> {
    check_params(params)?;
    if spec.points < 1 || !(spec.lo_fraction > 0.0 && spec.lo_fraction <= 1.0) {
        return Err(invalid("grid needs at least one point and a lower edge in (0, 1]"));
    }
    let axis = spec.axis(budget);
    let refs: Vec<usize> = spec.refs.clone().unwrap_or_else(|| (1..params.m).collect());
    let mut best: Option<GridOptimum> = None;
    for &n in &refs {
        if n < 1 || n >= params.m {
            return Err(invalid(format!("grid N={n} outside 1..{}", params.m)));
        }
        for &a in &axis {
            for &b in &axis {
                let alloc = Allocation::new(n, a, b);
                if alloc.power_sum(params.m) > budget {
                    continue;
                }
                let u = ratio_parts_unchecked(params, n as f64, a, b).ratio();
                if best.is_none_or(|g| u > g.u) {
                    best = Some(GridOptimum { alloc, u });
                }
            }
        }
    }
    best.ok_or_else(|| invalid("no feasible grid point under the budget"))
}

/// Relative distance between the printed `a` update and the true maximizer
/// of `V` along `a` (the vertex of the quadratic, unconstrained).
pub fn update_a_gap(params: &SystemParams, b: f64, n: usize, q: f64) -> Result<f64> {
    let printed = update_a(params, b, n, q)?;
    let exact = stationary_along(|a| v_unchecked(params, n as f64, a, b, q));
    Ok(((printed - exact) / exact).abs())
}

pub fn update_b_gap(params: &SystemParams, a: f64, n: usize, q: f64) -> Result<f64> {
    let printed = update_b(params, a, n, q)?;
    let exact = stationary_along(|b| v_unchecked(params, n as f64, a, b, q));
    Ok(((printed - exact) / exact).abs())
}

// Vertex of a quadratic from three samples at 0, 1, 2.
fn stationary_along(f: impl Fn(f64) -> f64) -> f64 {
    let (f0, f1, f2) = (f(0.0), f(1.0), f(2.0));
    let curv = f0 - 2.0 * f1 + f2;
    let slope0 = (-3.0 * f0 + 4.0 * f1 - f2) / 2.0;
    -slope0 / curv
}

/// Checks every intermediate point of a result for feasibility.
pub fn is_feasible(params: &SystemParams, alloc: &Allocation, power: &PowerBox) -> bool {
    validate(params, alloc, Some(power.budget * (1.0 + 1e-12))).is_empty()
        && alloc.a() >= power.floor
        && alloc.b() >= power.floor
}
