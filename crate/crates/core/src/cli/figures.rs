//! Default sweeps behind the `figure` command.
//!
//! | id | rows |
//! |----|------|
//! | 4  | equal power, N = 1..M-1 for P = 1, 2, 3 at 10 dB |
//! | 5  | equal power, Eb/N0 = 0..14 dB for N = 1, 3, 12 and P = 1, 2, 3 |
//! | 6  | equal power, P = 1, N = 1, 4, 8, 24 and the closed-form N*, 0..14 dB |
//! | 7  | joint power, P = 1, N = 1..16 on a 20 x 20 log grid of (a, b) inside the budget |
//! | 8  | `8-sa` at the closed-form N* against `8-psa` from the joint optimizer, P = 1, 2, 3 |
//! | 9  | `9-sa` / `9-psa` as in 8 for beta = 16, 64, 128 at P = 2 |
//! | 10 | joint power, a-sweep over 30 log points in [0.001, 0.3], b = 0.01, N = 2, 3, 4, 6, P = 2 |
//! | 11 | joint power, same a-sweep with N = 3 and b = 0.05, 0.1, 0.3, P = 2 |
//!
//! Unless noted the scenario is M = 64, beta = 128, N0 = 1, Eb/N0 = 10 dB,
//! and every flag that names a swept quantity replaces its default list.
//! With `trials > 0` each row also gets a Monte Carlo estimate.

use crate::analytic::{ber_psa, ber_sa};
use crate::cardano::optimal_n_closed_form;
use crate::dinkelbach::{bisection_solve, DinkelbachConfig, PowerBox};
use crate::model::{ensure_valid, Allocation, SystemParams, DEFAULT_POWER_BUDGET};
use crate::simulator::{estimate_ber, Mode, SimConfig, DEFAULT_SHARDS};

use super::config::{log_space, ExperimentConfig};
use super::csv::CsvRow;
use super::CliError;

pub const FIGURE_IDS: &[u32] = &[4, 5, 6, 7, 8, 9, 10, 11];
pub const DEFAULT_SEED: u64 = 1;

fn list<T: Clone>(v: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    v.clone().unwrap_or_else(|| default.to_vec())
}

fn db_range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

/// Scenario grid in (M, beta, P, Eb/N0) order.
fn scenarios(
    cfg: &ExperimentConfig,
    beta: &[usize],
    p: &[usize],
    db: &[f64],
) -> Result<Vec<(SystemParams, f64)>, CliError> {
    let n0 = cfg.n0.unwrap_or(1.0);
    let mut out = Vec::new();
    for &m in &list(&cfg.m, &[64]) {
        for &beta in &list(&cfg.beta, beta) {
            for &p in &list(&cfg.p, p) {
                for &db in &list(&cfg.ebn0_db, db) {
                    out.push((SystemParams::from_ebn0_db(m, beta, p, db, n0)?, db));
                }
            }
        }
    }
    Ok(out)
}

fn base_row(id: &str, params: &SystemParams, db: f64, alloc: &Allocation) -> CsvRow {
    CsvRow {
        figure_id: id.to_string(),
        m: params.m,
        beta: params.beta,
        p: params.users,
        ebn0_db: db,
        n: alloc.n(),
        a: alloc.a(),
        b: alloc.b(),
        power_sum: alloc.power_sum(params.m),
        ber_analytic: None,
        ber_mc: None,
        ci_low: None,
        ci_high: None,
        bits: None,
        seed: None,
    }
}

struct Builder<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<CsvRow>,
}

impl Builder<'_> {
    fn push(&mut self, id: &str, (params, db): &(SystemParams, f64), alloc: Allocation, mode: Mode) -> Result<(), CliError> {
        ensure_valid(params, &alloc, None)?;
        let mut row = base_row(id, params, *db, &alloc);
        row.ber_analytic = Some(match mode {
            Mode::Sa => ber_sa(params, alloc.n())?,
            Mode::Psa => ber_psa(params, &alloc)?,
        });
        let trials = self.cfg.trials.unwrap_or(0);
        if trials > 0 {
            let seed = self.cfg.seed.unwrap_or(DEFAULT_SEED);
            let sim = SimConfig {
                shards: self.cfg.shards.unwrap_or(DEFAULT_SHARDS),
                noise: self.cfg.noise.unwrap_or_default(),
                confidence: self.cfg.confidence.unwrap_or(crate::simulator::DEFAULT_CONFIDENCE),
                ..Default::default()
            };
            let est = estimate_ber(params, &alloc, trials, seed, mode, &sim)?.pooled;
            row.ber_mc = Some(est.ber);
            row.ci_low = Some(est.ci_low);
            row.ci_high = Some(est.ci_high);
            row.bits = Some(est.bits);
            row.seed = Some(seed);
        }
        self.rows.push(row);
        Ok(())
    }
}

pub fn parse_figure_id(id: &str) -> Result<u32, CliError> {
    id.trim()
        .parse::<u32>()
        .ok()
        .filter(|n| FIGURE_IDS.contains(n))
        .ok_or_else(|| CliError::Usage(format!("unknown figure '{id}', expected one of 4..11")))
}

/// Rows for one figure, in a fixed order.
pub fn figure_rows(id: u32, cfg: &ExperimentConfig) -> Result<Vec<CsvRow>, CliError> {
    let mut b = Builder { cfg, rows: Vec::new() };
    let fid = id.to_string();
    let ct = cfg.ct.unwrap_or(DEFAULT_POWER_BUDGET);
    match id {
        4 => {
            for sc in scenarios(cfg, &[128], &[1, 2, 3], &[10.0])? {
                let all: Vec<usize> = (1..sc.0.m).collect();
                for n in list(&cfg.n, &all) {
                    b.push(&fid, &sc, Allocation::equal_power(n), Mode::Sa)?;
                }
            }
        }
        5 => {
            for sc in scenarios(cfg, &[128], &[1, 2, 3], &db_range(0, 14))? {
                for n in list(&cfg.n, &[1, 3, 12]) {
                    b.push(&fid, &sc, Allocation::equal_power(n), Mode::Sa)?;
                }
            }
        }
        6 => {
            for sc in scenarios(cfg, &[128], &[1], &db_range(0, 14))? {
                let mut refs = list(&cfg.n, &[1, 4, 8, 24]);
                let n_star = optimal_n_closed_form(&sc.0)?.0;
                if !refs.contains(&n_star) {
                    refs.push(n_star);
                }
                for n in refs {
                    b.push(&fid, &sc, Allocation::equal_power(n), Mode::Sa)?;
                }
            }
        }
        7 => {
            let axis = log_space(1e-4 * ct, ct, 20);
            let refs: Vec<usize> = (1..=16).collect();
            for sc in scenarios(cfg, &[128], &[1], &[10.0])? {
                for n in list(&cfg.n, &refs) {
                    for &a in &list(&cfg.a, &axis) {
                        for &bb in &list(&cfg.b, &axis) {
                            let alloc = Allocation::new(n, a, bb);
                            if alloc.power_sum(sc.0.m) <= ct {
                                b.push(&fid, &sc, alloc, Mode::Psa)?;
                            }
                        }
                    }
                }
            }
        }
        8 | 9 => {
            let (betas, users): (&[usize], &[usize]) = if id == 8 { (&[128], &[1, 2, 3]) } else { (&[16, 64, 128], &[2]) };
            let dink = DinkelbachConfig {
                power: PowerBox::new(ct),
                method: cfg.method.unwrap_or_default(),
                ..Default::default()
            };
            for sc in scenarios(cfg, betas, users, &db_range(0, 14))? {
                let n_star = optimal_n_closed_form(&sc.0)?.0;
                b.push(&format!("{id}-sa"), &sc, Allocation::equal_power(n_star), Mode::Sa)?;
                let joint = bisection_solve(&sc.0, &dink)?;
                b.push(&format!("{id}-psa"), &sc, joint.alloc_star, Mode::Psa)?;
            }
        }
        10 | 11 => {
            let (refs, bs): (&[usize], &[f64]) = if id == 10 { (&[2, 3, 4, 6], &[0.01]) } else { (&[3], &[0.05, 0.1, 0.3]) };
            let sweep = log_space(1e-3, 0.3, 30);
            for sc in scenarios(cfg, &[128], &[2], &[10.0])? {
                for n in list(&cfg.n, refs) {
                    for &bb in &list(&cfg.b, bs) {
                        for &a in &list(&cfg.a, &sweep) {
                            b.push(&fid, &sc, Allocation::new(n, a, bb), Mode::Psa)?;
                        }
                    }
                }
            }
        }
        _ => return Err(CliError::Usage(format!("unknown figure '{id}', expected one of 4..11"))),
    }
    Ok(b.rows)
}
