//! Chaotic spreading sequences: statistics and cross-correlation.
//!
//! cargo run --example chaotic_sequences -- [beta]

use dcsk_alloc::chaos::{derive_seed, generate, normalize_energy, ChaoticMap, DEFAULT_BURN_IN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta: usize = std::env::args().nth(1).map_or(Ok(128), |s| s.parse())?;
    for map in [ChaoticMap::Chebyshev, ChaoticMap::Logistic] {
        let x = generate(map, 1, beta, DEFAULT_BURN_IN)?;
        let mean = x.chips.iter().sum::<f64>() / beta as f64;
        let y = normalize_energy(&x, 1.0)?;
        println!("{map:?}: first chips {:.4?} mean={mean:.2e} energy={:.4} normalized={:.15}", &x.chips[..4], x.energy(), y.energy());

        let mut worst: f64 = 0.0;
        let mut sum_sq = 0.0;
        let pairs = 2000;
        for k in 0..pairs {
            let u = generate(map, derive_seed(7, &[k, 0]), beta, DEFAULT_BURN_IN)?;
            let v = generate(map, derive_seed(7, &[k, 1]), beta, DEFAULT_BURN_IN)?;
            let rho = u.correlation(&v);
            worst = worst.max(rho.abs());
            sum_sq += rho * rho;
        }
        println!("  {pairs} user pairs: rms correlation {:.4} (1/sqrt(beta) = {:.4}), max {worst:.4}",
            (sum_sq / pairs as f64).sqrt(), 1.0 / (beta as f64).sqrt());
    }
    Ok(())
}
