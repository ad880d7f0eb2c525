//! Optimal number of reference sub-carriers from the cubic closed form,
//! checked against an exhaustive scan.
//!
//! cargo run --example optimal_references -- [M] [beta]

use dcsk_alloc::analytic::ber_sa;
use dcsk_alloc::cardano::{depressed, interior_stationary_points, optimal_n_bruteforce, optimal_n_closed_form};
use dcsk_alloc::SystemParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map_or(Ok(64), |s| s.parse())?;
    let beta: usize = args.get(1).map_or(Ok(128), |s| s.parse())?;

    for users in [1, 2, 3] {
        for db in (0..=15).step_by(3) {
            let params = SystemParams::from_ebn0_db(m, beta, users, db as f64, 1.0)?;
            let n = optimal_n_closed_form(&params)?.0;
            let brute = optimal_n_bruteforce(&params)?.0;
            let dc = depressed(&params);
            println!(
                "P={users} ebn0_db={db:>2} n_star={n:>2} bruteforce={brute:>2} roots={:?} delta={:.3e} ber={:.4e}",
                interior_stationary_points(&params),
                dc.delta,
                ber_sa(&params, n)?
            );
        }
    }
    Ok(())
}
