//! Averaging N noisy copies of the reference divides its noise variance by N.
//!
//! cargo run --release --example noise_averaging -- [frames]

use dcsk_alloc::simulator::{reference_noise_variance, NoiseModel, SimConfig};
use dcsk_alloc::SystemParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frames: u64 = std::env::args().nth(1).map_or(Ok(20_000), |s| s.parse())?;
    let params = SystemParams::from_ebn0_db(64, 128, 1, 10.0, 1.0)?;
    for noise in [NoiseModel::Complex, NoiseModel::Real] {
        let cfg = SimConfig { noise, ..Default::default() };
        for n in [1, 2, 4, 12, 24] {
            let (re, im) = reference_noise_variance(&params, n, frames, 5, &cfg)?;
            let expected = params.n0 / (2.0 * n as f64);
            println!("{noise:?} N={n:>2} var_re={re:.5} var_im={im:.5} expected={expected:.5} ratio={:.4}", re / expected);
        }
    }
    Ok(())
}
