//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.
//!
//! cargo test --release --test acceptance

use std::process::Command;
use std::time::{Duration, Instant};

use dcsk_alloc::analytic::{ber_psa, ber_sa, ratio_u, BER_FLOOR};
use dcsk_alloc::cardano::{optimal_n_bruteforce, optimal_n_closed_form};
use dcsk_alloc::cli::csv::{format_f64, HEADER};
use dcsk_alloc::dinkelbach::{bisection_solve, grid_oracle, DinkelbachConfig, GridSpec, InnerMethod};
use dcsk_alloc::simulator::{estimate_ber, frames_for_bits, reference_noise_variance, BerEstimate, Mode, SimConfig};
use dcsk_alloc::{Allocation, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn params(m: usize, beta: usize, p: usize, db: f64) -> SystemParams {
    SystemParams::from_ebn0_db(m, beta, p, db, 1.0).expect("valid scenario")
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for m in [8, 16, 32, 64] {
        for beta in [16, 32, 128] {
            for p in [1, 2, 3] {
                for db in 0..=15 {
                    let sp = params(m, beta, p, db as f64);
                    let cf = optimal_n_closed_form(&sp).map_err(|e| e.to_string())?.0;
                    let bf = optimal_n_bruteforce(&sp).map_err(|e| e.to_string())?.0;
                    cases += 1;
                    if cf != bf {
                        mismatches.push(format!("M={m} beta={beta} P={p} {db} dB: {cf} vs {bf}"));
                    }
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let detail = format!("{}/{cases} equal in {elapsed:.2?}", cases - mismatches.len());
    if cases == 576 && mismatches.is_empty() && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(format!("{detail}; {mismatches:?}"))
    }
}

fn criterion_2() -> Outcome {
    let n = optimal_n_closed_form(&params(64, 128, 1, 10.0)).map_err(|e| e.to_string())?.0;
    if n == 12 {
        Ok("N* = 12".into())
    } else {
        Err(format!("N* = {n}, expected 12"))
    }
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for p in [1, 2] {
        let sp = params(16, 32, p, 10.0);
        let res = bisection_solve(&sp, &DinkelbachConfig::default()).map_err(|e| e.to_string())?;
        let spec = GridSpec { points: 50, refs: Some((1..=15).collect()), ..Default::default() };
        let oracle = grid_oracle(&sp, 1.0, &spec).map_err(|e| e.to_string())?;
        let u = ratio_u(&sp, &res.alloc_star).map_err(|e| e.to_string())?;
        let good = res.v_residual.abs() < 1e-9
            && res.outer_iterations <= 200
            && u >= 0.99 * oracle.u
            && res.sign_structure_holds()
            && res.inner_method == InnerMethod::Numeric;
        ok &= good;
        details.push(format!(
            "P={p}: |F|={:.1e} iters={} U={u:.6} grid={:.6} signs={}",
            res.v_residual.abs(),
            res.outer_iterations,
            oracle.u,
            res.sign_structure_holds()
        ));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    let detail = format!("{} ({elapsed:.2?})", details.join("; "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The optimal a/b ratio on the grid, at the oracle's N, lies strictly inside
/// the feasible ratio range, and both extreme ratios are strictly worse.
fn ratio_interior(sp: &SystemParams, n: usize) -> Result<(bool, f64), String> {
    let spec = GridSpec { points: 50, refs: Some(vec![n]), ..Default::default() };
    let axis = spec.axis(1.0);
    let mut best_by_k: std::collections::BTreeMap<i64, f64> = Default::default();
    for (i, &a) in axis.iter().enumerate() {
        for (j, &b) in axis.iter().enumerate() {
            let alloc = Allocation::new(n, a, b);
            if alloc.power_sum(sp.m) > 1.0 {
                continue;
            }
            let u = ratio_u(sp, &alloc).map_err(|e| e.to_string())?;
            let e = best_by_k.entry(i as i64 - j as i64).or_insert(f64::NEG_INFINITY);
            *e = e.max(u);
        }
    }
    let (&k_lo, &u_lo) = best_by_k.iter().next().ok_or("empty grid")?;
    let (&k_hi, &u_hi) = best_by_k.iter().next_back().ok_or("empty grid")?;
    let (&k_star, &u_star) = best_by_k.iter().max_by(|x, y| x.1.total_cmp(y.1)).ok_or("empty grid")?;
    // Log-spaced axis: a_i / b_j = r^(i - j).
    let ratio = (axis[1] / axis[0]).powi(k_star as i32);
    Ok((k_lo < k_star && k_star < k_hi && u_lo < u_star && u_hi < u_star, ratio))
}

fn criterion_4() -> Outcome {
    let mut details = Vec::new();
    let mut any = false;
    for p in [1, 2] {
        let sp = params(64, 128, p, 10.0);
        let res = bisection_solve(&sp, &DinkelbachConfig::default()).map_err(|e| e.to_string())?;
        let n = res.alloc_star.n();
        let oracle = grid_oracle(&sp, 1.0, &GridSpec::default()).map_err(|e| e.to_string())?;
        let (interior, ratio) = ratio_interior(&sp, oracle.alloc.n())?;
        let hit = (3..=5).contains(&n) && interior;
        any |= hit;
        details.push(format!("P={p}: N*={n} grid N={} a/b={ratio:.3} interior={interior}", oracle.alloc.n()));
    }
    if any {
        Ok(details.join("; "))
    } else {
        Err(details.join("; "))
    }
}

fn criterion_5() -> Outcome {
    let sp = params(64, 128, 1, 10.0);
    let mut details = Vec::new();
    let mut ok = true;
    for n in [1, 4, 12] {
        let (re, im) = reference_noise_variance(&sp, n, 100_000, 42, &SimConfig::default()).map_err(|e| e.to_string())?;
        let target = sp.n0 / (2.0 * n as f64);
        let (dr, di) = (re / target - 1.0, im / target - 1.0);
        ok &= dr.abs() <= 0.05 && di.abs() <= 0.05;
        details.push(format!("N={n}: {:+.2}% / {:+.2}%", 100.0 * dr, 100.0 * di));
    }
    if ok {
        Ok(details.join("; "))
    } else {
        Err(details.join("; "))
    }
}

fn mc(sp: &SystemParams, n: usize, seed: u64) -> Result<BerEstimate, String> {
    let frames = frames_for_bits(sp, n, 1_000_000);
    let res = estimate_ber(sp, &Allocation::equal_power(n), frames, seed, Mode::Sa, &SimConfig::default())
        .map_err(|e| e.to_string())?;
    Ok(res.pooled)
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let sp = params(64, 128, 1, 10.0);
    let refs = [1, 2, 3, 6, 9, 12, 16, 24, 40];
    let est: Vec<BerEstimate> = refs.iter().map(|&n| mc(&sp, n, 6)).collect::<Result<_, _>>()?;
    let i_min = (0..refs.len()).min_by(|&i, &j| est[i].ber.total_cmp(&est[j].ber)).unwrap();
    let best = est[i_min];
    let left = est[..i_min].iter().any(|e| e.ci_low > best.ci_high);
    let right = est[i_min + 1..].iter().any(|e| e.ci_low > best.ci_high);
    let n_star = optimal_n_closed_form(&sp).map_err(|e| e.to_string())?.0;
    let argmin = refs[i_min];
    let near = argmin.abs_diff(n_star) <= 2;
    println!("info: MC argmin N={argmin}; distance to the literal N*=12 is {}", argmin.abs_diff(12));

    let at12: Vec<BerEstimate> =
        [6.0, 8.0, 10.0].iter().map(|&db| mc(&params(64, 128, 1, db), 12, 7)).collect::<Result<_, _>>()?;
    let monotone = at12.windows(2).all(|w| w[1].ber < w[0].ber && w[1].ci_high < w[0].ci_low);
    let elapsed = t.elapsed();

    let curve: Vec<String> = refs.iter().zip(&est).map(|(n, e)| format!("{n}:{:.3e}", e.ber)).collect();
    let detail = format!(
        "argmin N={argmin} (analytic N*={n_star}), U-shape left={left} right={right}, N=12 at 6/8/10 dB {:.3e}/{:.3e}/{:.3e} separated={monotone}, curve [{}] ({elapsed:.1?})",
        at12[0].ber,
        at12[1].ber,
        at12[2].ber,
        curve.join(" ")
    );
    if left && right && near && monotone && elapsed < Duration::from_secs(600) && est.iter().all(|e| e.bits >= 1_000_000) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut range_ok = true;
    for _ in 0..10_000 {
        let m = rng.random_range(2..=128usize);
        let sp = params(m, rng.random_range(1..=256), rng.random_range(1..=4), rng.random_range(-10.0..20.0));
        let alloc = Allocation::new(rng.random_range(1..m), 10f64.powf(rng.random_range(-4.0..0.0)), 10f64.powf(rng.random_range(-4.0..0.0)));
        let got = ber_psa(&sp, &alloc).map_err(|e| e.to_string())?;
        let want = 0.5 * libm::erfc(ratio_u(&sp, &alloc).map_err(|e| e.to_string())?.sqrt());
        let want = if want < BER_FLOOR { 0.0 } else { want };
        if want > 0.0 {
            worst = worst.max((got - want).abs() / want);
        } else if got != 0.0 {
            worst = f64::INFINITY;
        }
        let sa = ber_sa(&sp, alloc.n()).map_err(|e| e.to_string())?;
        range_ok &= (0.0..=0.5).contains(&got) && (0.0..=0.5).contains(&sa);
    }

    let mut monotone_eb = true;
    let mut monotone_p = true;
    for m in [8, 16, 64] {
        for beta in [16, 128] {
            for n in [1, m / 4, m - 1] {
                let alloc = Allocation::new(n, 0.01, 0.02);
                for p in 1..=4 {
                    let mut prev = (f64::INFINITY, f64::INFINITY);
                    for db in 0..=15 {
                        let sp = params(m, beta, p, db as f64);
                        let cur = (ber_sa(&sp, n).unwrap(), ber_psa(&sp, &alloc).unwrap());
                        monotone_eb &= cur.0 < prev.0 && cur.1 < prev.1;
                        prev = cur;
                    }
                }
                for db in 0..=15 {
                    let mut prev = (0.0, 0.0);
                    for p in 1..=4 {
                        let sp = params(m, beta, p, db as f64);
                        let cur = (ber_sa(&sp, n).unwrap(), ber_psa(&sp, &alloc).unwrap());
                        monotone_p &= cur.0 >= prev.0 && cur.1 >= prev.1;
                        prev = cur;
                    }
                }
            }
        }
    }
    let detail = format!("max rel err {worst:.2e}, range={range_ok}, decreasing in Eb={monotone_eb}, nondecreasing in P={monotone_p}");
    if worst <= 1e-12 && range_ok && monotone_eb && monotone_p {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dcsk-alloc")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut problems = Vec::new();

    let runs: [(&str, &[&str]); 3] = [
        ("4", &[]),
        ("10", &[]),
        ("5", &["--p", "1", "--n", "3", "--ebn0-db", "0:5:10", "--trials", "30", "--seed", "3"]),
    ];
    let mut cells = 0usize;
    for (id, extra) in runs {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let out = path(&format!("fig{id}-{k}.csv"));
            let mut args = vec!["figure", id, "--out", out.as_str()];
            args.extend_from_slice(extra);
            let (code, _) = bin(&args)?;
            if code != 0 {
                problems.push(format!("figure {id} exit {code}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            problems.push(format!("figure {id} not byte-identical"));
        }
        let text = String::from_utf8(outputs[0].clone()).map_err(|e| e.to_string())?;
        if text.contains('\r') || !text.starts_with(&format!("{HEADER}\n")) {
            problems.push(format!("figure {id} header or line endings"));
        }
        for line in text.lines().skip(1) {
            for (col, field) in line.split(',').enumerate() {
                // Columns holding doubles.
                if [4, 6, 7, 8, 9, 10, 11, 12].contains(&col) && !field.is_empty() {
                    cells += 1;
                    let x: f64 = field.parse().map_err(|_| format!("unparsable cell {field}"))?;
                    if format_f64(x) != field {
                        problems.push(format!("cell {field} does not round-trip"));
                    }
                }
            }
        }
    }

    let bad_out = path("missing-dir/x.csv");
    let bad_cfg = path("nope.cfg");
    let cases: [(&[&str], i32); 10] = [
        (&["optimal-n"], 0),
        (&["frobnicate"], 2),
        (&["figure", "12"], 2),
        (&["ber", "--m", "abc"], 2),
        (&["ber", "--bogus", "1"], 2),
        (&["figure", "4", "--out", &bad_out], 3),
        (&["ber", "--config", &bad_cfg], 3),
        (&["ber", "--m", "1"], 4),
        (&["simulate", "--n", "64", "--trials", "1"], 4),
        (&["joint-opt", "--ct", "0"], 4),
    ];
    for (args, want) in cases {
        let (code, _) = bin(args)?;
        if code != want {
            problems.push(format!("{args:?} exit {code}, expected {want}"));
        }
    }
    let detail = format!("3 figures rerun, {cells} cells round-tripped, 10 exit-code cases");
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "closed-form N* equals brute force on 576 cases", criterion_1),
        (2, "N* = 12 at M=64, beta=128, P=1, 10 dB", criterion_2),
        (3, "Dinkelbach residual, grid oracle and sign structure at M=16", criterion_3),
        (4, "joint optimum N* in {3,4,5} with an interior (a, b) optimum", criterion_4),
        (5, "averaged reference noise variance N0/(2N)", criterion_5),
        (6, "Monte Carlo U-shape, argmin and SNR monotonicity", criterion_6),
        (7, "analytic BER consistency and monotonicity", criterion_7),
        (8, "figure determinism, CSV round-trip and exit codes", criterion_8),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {id}: {name}: {detail} [{:.1?}]", t.elapsed());
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
