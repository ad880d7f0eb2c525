//! Monte Carlo BER against the analytic curve over the number of references.
//!
//! cargo run --release --example monte_carlo_ber -- [bits per N] [seed] [real]
//!
//! Passing `real` switches to real-valued noise.

use std::time::Instant;

use dcsk_alloc::analytic::ber_sa;
use dcsk_alloc::cardano::optimal_n_closed_form;
use dcsk_alloc::simulator::{estimate_ber, frames_for_bits, Mode, NoiseModel, SimConfig};
use dcsk_alloc::{Allocation, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let bits: u64 = args.first().map_or(Ok(200_000), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let noise = if args.get(2).map(String::as_str) == Some("real") { NoiseModel::Real } else { NoiseModel::Complex };

    let params = SystemParams::from_ebn0_db(64, 128, 1, 10.0, 1.0)?;
    let n_star = optimal_n_closed_form(&params)?.0;
    println!("n_star={n_star} noise={noise:?}");
    let config = SimConfig { noise, ..Default::default() };
    let t = Instant::now();
    for n in [1, 2, 3, 6, 9, 12, 14, 16, 24, 40] {
        let frames = frames_for_bits(&params, n, bits);
        let est = estimate_ber(&params, &Allocation::equal_power(n), frames, seed, Mode::Sa, &config)?.pooled;
        println!(
            "N={n:2} analytic={:.4e} mc={:.4e} ci=[{:.4e}, {:.4e}] bits={}",
            ber_sa(&params, n)?,
            est.ber,
            est.ci_low,
            est.ci_high,
            est.bits
        );
    }
    println!("elapsed={:.2?}", t.elapsed());
    Ok(())
}
