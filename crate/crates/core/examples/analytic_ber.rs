//! Closed-form BER of the equal-power and joint-power schemes.
//!
//! cargo run --example analytic_ber

use dcsk_alloc::analytic::{ber_psa, ber_sa, objective_sa, ratio_u};
use dcsk_alloc::{Allocation, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("equal power, M=64 beta=128 N=12");
    for users in [1, 2, 3] {
        for db in [0.0, 5.0, 10.0, 15.0] {
            let params = SystemParams::from_ebn0_db(64, 128, users, db, 1.0)?;
            println!(
                "P={users} ebn0_db={db:>4} objective={:.6e} ber={:.6e}",
                objective_sa(&params, 12)?,
                ber_sa(&params, 12)?
            );
        }
    }

    println!("joint power, P=2 N=3 b=0.01");
    let params = SystemParams::from_ebn0_db(64, 128, 2, 10.0, 1.0)?;
    for a in [1e-3, 3e-3, 1e-2, 3e-2, 0.1] {
        let alloc = Allocation::new(3, a, 0.01);
        println!("a={a:<6} U={:.6} ber={:.6e}", ratio_u(&params, &alloc)?, ber_psa(&params, &alloc)?);
    }
    Ok(())
}
