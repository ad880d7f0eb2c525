//! Deterministic report of where the printed formulas disagree with each
//! other, with their own derivatives, or with the simulator.
//!
//! All numbers are taken at M = 64, beta = 128, N0 = 1, Eb/N0 = 10 dB and
//! P = 1, 2.

use std::fmt::Write as _;

use crate::analytic::{ber_psa, ber_sa, objective_sa_terms, psa_printed_bracket, ratio_u};
use crate::cardano::{depressed, interior_stationary_points, optimal_n_closed_form, printed_depressed, real_roots};
use crate::cardano::DepressedCubic;
use crate::dinkelbach::{bisection_solve, update_a, update_a_gap, update_b, update_b_gap, DinkelbachConfig, InnerMethod};
use crate::error::Result;
use crate::model::{Allocation, SystemParams};
use crate::simulator::{estimate_ber, frames_for_bits, Mode, NoiseModel, SimConfig};

pub const SECTION_REDUCTION: &str = "== reduction gap: equal-power vs joint-power BER at a = b = 1 ==";
pub const SECTION_CUBIC: &str = "== depressed cubic: printed vs derived zeta, xi ==";
pub const SECTION_KKT: &str = "== stationary updates: kkt-verbatim vs numeric ==";
pub const SECTION_OTHER: &str = "== other observations ==";

const USERS: [usize; 2] = [1, 2];
const MC_BITS: u64 = 200_000;
const MC_SEED: u64 = 2024;

fn reference(users: usize) -> Result<SystemParams> {
    SystemParams::from_ebn0_db(64, 128, users, 10.0, 1.0)
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

/// Builds the full report. Running it twice gives the same text.
pub fn errata_report() -> Result<String> {
    let mut s = String::new();
    reduction_gap(&mut s)?;
    cubic(&mut s)?;
    kkt(&mut s)?;
    other(&mut s)?;
    Ok(s)
}

fn reduction_gap(s: &mut String) -> Result<()> {
    writeln!(s, "{SECTION_REDUCTION}").unwrap();
    for users in USERS {
        let params = reference(users)?;
        let n = optimal_n_closed_form(&params)?.0;
        let unit = Allocation::equal_power(n);
        let sa = objective_sa_terms(&params, n)?;
        let psa = psa_printed_bracket(&params, &unit)?;
        writeln!(s, "P={users} N={n}").unwrap();
        writeln!(s, "  first-term coefficient: equal-power P = {users}, joint-power (b+aP)/(ab) = {}", 1 + users)
            .unwrap();
        for (k, (x, y)) in sa.iter().zip(&psa).enumerate() {
            let ratio = if *x == 0.0 { "n/a".to_string() } else { format!("{:.6}", y / x) };
            writeln!(s, "  term {}: equal-power {x:.9e}  joint-power {y:.9e}  ratio {ratio}", k + 1).unwrap();
        }
        let inv_u = 1.0 / ratio_u(&params, &unit)?;
        writeln!(s, "  equal-power objective {:.9e}  joint-power 1/U {inv_u:.9e}", sa.iter().sum::<f64>()).unwrap();
        let (b_sa, b_psa) = (ber_sa(&params, n)?, ber_psa(&params, &unit)?);
        writeln!(s, "  ber equal-power {b_sa:.9e}  joint-power {b_psa:.9e}  relative gap {:.4}", rel(b_psa, b_sa))
            .unwrap();
    }
    writeln!(s, "  the third joint-power term lacks the power-sum factor that 1/U carries").unwrap();
    let params = reference(1)?;
    let n_sa = optimal_n_closed_form(&params)?.0;
    let joint = bisection_solve(&params, &DinkelbachConfig::default())?;
    writeln!(
        s,
        "  P=1: equal-power optimum ber {:.6e} (N={n_sa}) beats the joint optimum {:.6e} (N={})",
        ber_sa(&params, n_sa)?,
        ber_psa(&params, &joint.alloc_star)?,
        joint.alloc_star.n()
    )
    .unwrap();
    writeln!(s).unwrap();
    Ok(())
}

fn cubic(s: &mut String) -> Result<()> {
    writeln!(s, "{SECTION_CUBIC}").unwrap();
    for users in USERS {
        let params = reference(users)?;
        let derived = depressed(&params);
        let (zeta_p, xi_p) = printed_depressed(&params);
        let shift = crate::cardano::cubic_coeffs(&params).shift();
        let printed_roots = real_roots(&DepressedCubic::new(zeta_p, xi_p), shift);
        writeln!(s, "P={users}").unwrap();
        writeln!(s, "  zeta printed {zeta_p:.9e}  derived {:.9e}  relative gap {:.4e}", derived.zeta, rel(zeta_p, derived.zeta))
            .unwrap();
        writeln!(s, "  xi   printed {xi_p:.9e}  derived {:.9e}  relative gap {:.4e}", derived.xi, rel(xi_p, derived.xi))
            .unwrap();
        writeln!(s, "  roots from printed {}", fmt_list(&printed_roots)).unwrap();
        writeln!(s, "  roots from derived {}", fmt_list(&interior_stationary_points(&params))).unwrap();
    }
    writeln!(s).unwrap();
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn kkt(s: &mut String) -> Result<()> {
    writeln!(s, "{SECTION_KKT}").unwrap();
    let (n, q, b, a) = (4usize, 3.0, 0.01, 0.01);
    for users in USERS {
        let params = reference(users)?;
        let line_a = match (update_a(&params, b, n, q), update_a_gap(&params, b, n, q)) {
            (Ok(x), Ok(g)) => format!("a update {x:.9e}  relative gap to the stationary point {g:.4e}"),
            (Err(e), _) | (_, Err(e)) => format!("a update rejected: {e}"),
        };
        let line_b = match (update_b(&params, a, n, q), update_b_gap(&params, a, n, q)) {
            (Ok(x), Ok(g)) => format!("b update {x:.9e}  relative gap to the stationary point {g:.4e}"),
            (Err(e), _) | (_, Err(e)) => format!("b update rejected: {e}"),
        };
        writeln!(s, "P={users} at N={n} q={q} (b={b} for a, a={a} for b)").unwrap();
        writeln!(s, "  {line_a}").unwrap();
        writeln!(s, "  {line_b}").unwrap();
        for method in [InnerMethod::Numeric, InnerMethod::KktVerbatim] {
            let r = bisection_solve(&params, &DinkelbachConfig { method, ..Default::default() })?;
            writeln!(
                s,
                "  {method}: N={} a={:.6e} b={:.6e} q*={:.9} evaluations={} fallbacks={}",
                r.alloc_star.n(),
                r.alloc_star.a(),
                r.alloc_star.b(),
                r.q_star,
                r.trace.len(),
                r.fallbacks
            )
            .unwrap();
        }
    }
    writeln!(s).unwrap();
    Ok(())
}

fn other(s: &mut String) -> Result<()> {
    writeln!(s, "{SECTION_OTHER}").unwrap();
    let params = reference(1)?;
    let n_star = optimal_n_closed_form(&params)?.0;
    let roots = interior_stationary_points(&params);
    writeln!(s, "equal-power optimum at P=1: N*={n_star}, stationary point {}", fmt_list(&roots)).unwrap();
    for n in [12, n_star] {
        writeln!(s, "  ber at N={n}: {:.9e}", ber_sa(&params, n)?).unwrap();
    }
    writeln!(s, "Monte Carlo vs analytic at P=1, {MC_BITS} bits per point, seed {MC_SEED}").unwrap();
    for n in [12, n_star] {
        let frames = frames_for_bits(&params, n, MC_BITS);
        let alloc = Allocation::equal_power(n);
        let mut line = format!("  N={n} analytic {:.4e}", ber_sa(&params, n)?);
        for noise in [NoiseModel::Complex, NoiseModel::Real] {
            let cfg = SimConfig { noise, ..Default::default() };
            let est = estimate_ber(&params, &alloc, frames, MC_SEED, Mode::Sa, &cfg)?.pooled;
            write!(line, "  {noise:?} noise {:.4e} [{:.4e}, {:.4e}]", est.ber, est.ci_low, est.ci_high).unwrap();
        }
        writeln!(s, "{line}").unwrap();
    }
    writeln!(s, "  complex noise doubles the noise-times-noise variance in the decision statistic").unwrap();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_coefficients() {
        let r = errata_report().unwrap();
        for h in [SECTION_REDUCTION, SECTION_CUBIC, SECTION_KKT, SECTION_OTHER] {
            assert!(r.contains(h), "{h}");
        }
        assert!(r.contains("equal-power P = 2, joint-power (b+aP)/(ab) = 3"));
        assert!(r.contains("equal-power P = 1, joint-power (b+aP)/(ab) = 2"));
        assert_eq!(r, errata_report().unwrap());
    }
}
