//! Joint sub-carrier and power allocation by bisection on the Dinkelbach
//! parameter, checked against an exhaustive grid.
//!
//! cargo run --release --example joint_allocation -- [M] [beta] [Eb/N0 dB]

use std::time::Instant;

use dcsk_alloc::analytic::{ber_psa, ratio_u};
use dcsk_alloc::dinkelbach::{bisection_solve, grid_oracle, DinkelbachConfig, GridSpec, InnerMethod};
use dcsk_alloc::SystemParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map_or(Ok(16), |s| s.parse())?;
    let beta: usize = args.get(1).map_or(Ok(32), |s| s.parse())?;
    let db: f64 = args.get(2).map_or(Ok(10.0), |s| s.parse())?;

    for users in [1, 2, 3] {
        let params = SystemParams::from_ebn0_db(m, beta, users, db, 1.0)?;
        for method in [InnerMethod::Numeric, InnerMethod::KktVerbatim] {
            let t = Instant::now();
            let res = bisection_solve(&params, &DinkelbachConfig { method, ..Default::default() })?;
            let alloc = res.alloc_star;
            println!(
                "P={users} method={method} N={} a={:.6e} b={:.6e} q*={:.9} U={:.9} F={:.2e} iters={} fallbacks={} ber={:.4e} ({:.2?})",
                alloc.n(),
                alloc.a(),
                alloc.b(),
                res.q_star,
                ratio_u(&params, &alloc)?,
                res.v_residual,
                res.outer_iterations,
                res.fallbacks,
                ber_psa(&params, &alloc)?,
                t.elapsed(),
            );
        }
        let t = Instant::now();
        let grid = grid_oracle(&params, 1.0, &GridSpec::default())?;
        println!(
            "P={users} grid N={} a={:.4e} b={:.4e} U={:.9} ({:.2?})",
            grid.alloc.n(),
            grid.alloc.a(),
            grid.alloc.b(),
            grid.u,
            t.elapsed()
        );
    }
    Ok(())
}
