//! Monte Carlo link simulation with reference averaging.
//!
//! Each sub-carrier is modelled by its matched-filter output, one sample per
//! chip. A block has `M` sub-carriers: every user owns `N` private
//! reference rows carrying `sqrt(b) x_p`, and the `M - N` data rows are
//! shared, row `i` carrying `sum_p sqrt(a) s_{i,p} x_p`. The chip energy
//! `sum x_k^2` is set so that the energy per data bit equals `Eb`:
//! `(M - N) Eb / ((M - N) a + N b)`.
//!
//! The receiver averages its `N` reference rows and correlates the result
//! with every data row. Frames are seeded by their index, so the estimate
//! depends on `(params, alloc, trials, seed)` only; the shard count changes
//! how work is split, not the result.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chaos::{derive_seed, generate, normalize_energy, ChaoticMap, ChaoticSequence, DEFAULT_BURN_IN};
use crate::error::{invalid, Result};
use crate::model::{ensure_valid, Allocation, SystemParams};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
pub const DEFAULT_SHARDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    /// Equal power on every sub-carrier (`a = b = 1`).
    #[default]
    Sa,
    /// Separate data and reference power coefficients.
    Psa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Circular complex Gaussian, `N0 / 2` per real dimension.
    #[default]
    Complex,
    /// Real Gaussian with variance `N0 / 2`, no quadrature component.
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub shards: usize,
    pub confidence: f64,
    pub noise: NoiseModel,
    pub map: ChaoticMap,
    pub burn_in: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            shards: DEFAULT_SHARDS,
            confidence: DEFAULT_CONFIDENCE,
            noise: NoiseModel::Complex,
            map: ChaoticMap::Chebyshev,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

/// Noiseless transmitted block, row-major `beta` chips per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub users: usize,
    pub refs: usize,
    pub beta: usize,
    /// `users * refs` rows, grouped by user.
    pub ref_tx: Vec<f64>,
    /// `M - N` shared data rows.
    pub data_tx: Vec<f64>,
}

impl Frame {
    pub fn data_rows(&self) -> usize {
        self.data_tx.len() / self.beta
    }

    pub fn ref_row(&self, user: usize, v: usize) -> &[f64] {
        let start = (user * self.refs + v) * self.beta;
        &self.ref_tx[start..start + self.beta]
    }

    pub fn data_row(&self, i: usize) -> &[f64] {
        &self.data_tx[i * self.beta..(i + 1) * self.beta]
    }

    /// Transmitted energy per data bit. Data rows of several users overlap,
    /// so this equals `Eb` only for a single user.
    pub fn energy_per_bit(&self) -> f64 {
        let e: f64 = self.ref_tx.iter().chain(&self.data_tx).map(|c| c * c).sum();
        e / (self.users * self.data_rows()) as f64
    }
}

/// Received samples of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation {
    pub users: usize,
    pub refs: usize,
    pub beta: usize,
    pub ref_rx: Vec<Complex64>,
    pub data_rx: Vec<Complex64>,
}

impl FrameObservation {
    pub fn data_rows(&self) -> usize {
        self.data_rx.len() / self.beta
    }

    pub fn ref_row(&self, user: usize, v: usize) -> &[Complex64] {
        let start = (user * self.refs + v) * self.beta;
        &self.ref_rx[start..start + self.beta]
    }

    /// Averaged reference `(1/N) sum_v ref_rx[v]` of one user.
    pub fn averaged_reference(&self, user: usize) -> Vec<Complex64> {
        let mut avg = vec![Complex64::new(0.0, 0.0); self.beta];
        for v in 0..self.refs {
            for (acc, y) in avg.iter_mut().zip(self.ref_row(user, v)) {
                *acc += y;
            }
        }
        let inv = 1.0 / self.refs as f64;
        avg.iter_mut().for_each(|c| *c *= inv);
        avg
    }
}

/// Decision statistics and hard decisions, indexed `[user][data row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decisions {
    pub stats: Vec<Vec<f64>>,
    pub bits: Vec<Vec<i8>>,
}

/// Energy `sum x_k^2` of each spreading sequence.
pub fn chip_energy(params: &SystemParams, alloc: &Allocation) -> f64 {
    let d = (params.m - alloc.n()) as f64;
    d * params.eb / alloc.power_sum(params.m)
}

/// The effective allocation for a mode: SA ignores the power coefficients.
pub fn effective_alloc(alloc: &Allocation, mode: Mode) -> Allocation {
    match mode {
        Mode::Sa => Allocation::equal_power(alloc.n()),
        Mode::Psa => *alloc,
    }
}

/// Energy-normalized sequences of every user for one frame.
pub fn user_sequences(
    params: &SystemParams,
    alloc: &Allocation,
    map: ChaoticMap,
    burn_in: usize,
    seed: u64,
    frame: u64,
) -> Result<Vec<ChaoticSequence>> {
    let energy = chip_energy(params, alloc);
    (0..params.users as u64)
        .map(|p| {
            let raw = generate(map, derive_seed(seed, &[frame, p]), params.beta, burn_in)?;
            normalize_energy(&raw, energy)
        })
        .collect()
}

/// Builds the noiseless block. `bits` is `users x (M - N)` with entries `+-1`.
pub fn transmit_frame(
    params: &SystemParams,
    alloc: &Allocation,
    bits: &[Vec<i8>],
    sequences: &[ChaoticSequence],
) -> Result<Frame> {
    ensure_valid(params, alloc, None)?;
    let (n, beta, users) = (alloc.n(), params.beta, params.users);
    let d = params.m - n;
    if bits.len() != users || bits.iter().any(|row| row.len() != d) {
        return Err(invalid(format!("bits must be {users} x {d}")));
    }
    if bits.iter().flatten().any(|&s| s != 1 && s != -1) {
        return Err(invalid("bits must be +1 or -1"));
    }
    if sequences.len() != users || sequences.iter().any(|s| s.len() != beta) {
        return Err(invalid(format!("need {users} sequences of {beta} chips")));
    }
    let (ga, gb) = (alloc.a().sqrt(), alloc.b().sqrt());
    let mut ref_tx = Vec::with_capacity(users * n * beta);
    for seq in sequences {
        for _ in 0..n {
            ref_tx.extend(seq.chips.iter().map(|x| gb * x));
        }
    }
    let mut data_tx = vec![0.0; d * beta];
    for (seq, user_bits) in sequences.iter().zip(bits) {
        for (row, &s) in data_tx.chunks_exact_mut(beta).zip(user_bits) {
            let g = ga * s as f64;
            for (acc, x) in row.iter_mut().zip(&seq.chips) {
                *acc += g * x;
            }
        }
    }
    Ok(Frame { users, refs: n, beta, ref_tx, data_tx })
}

/// Adds independent noise to every sample.
pub fn awgn<R: Rng + ?Sized>(frame: &Frame, n0: f64, noise: NoiseModel, rng: &mut R) -> FrameObservation {
    let ref_rx = add_noise(&frame.ref_tx, n0, noise, rng);
    let data_rx = add_noise(&frame.data_tx, n0, noise, rng);
    FrameObservation { users: frame.users, refs: frame.refs, beta: frame.beta, ref_rx, data_rx }
}

fn add_noise<R: Rng + ?Sized>(samples: &[f64], n0: f64, noise: NoiseModel, rng: &mut R) -> Vec<Complex64> {
    let sigma = (0.5 * n0).sqrt();
    samples
        .iter()
        .map(|&x| {
            let re: f64 = rng.sample(StandardNormal);
            match noise {
                NoiseModel::Complex => {
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(x + sigma * re, sigma * im)
                }
                NoiseModel::Real => Complex64::new(x + sigma * re, 0.0),
            }
        })
        .collect()
}

/// Correlates every data row with each user's averaged reference.
pub fn receive_frame(obs: &FrameObservation) -> Decisions {
    let mut stats = Vec::with_capacity(obs.users);
    let mut bits = Vec::with_capacity(obs.users);
    for p in 0..obs.users {
        let r = obs.averaged_reference(p);
        let row_stats: Vec<f64> = obs
            .data_rx
            .chunks_exact(obs.beta)
            .map(|y| y.iter().zip(&r).map(|(y, r)| y.re * r.re + y.im * r.im).sum())
            .collect();
        bits.push(row_stats.iter().map(|&z| if z >= 0.0 { 1 } else { -1 }).collect());
        stats.push(row_stats);
    }
    Decisions { stats, bits }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl BerEstimate {
    pub fn new(bit_errors: u64, bits: u64, confidence: f64) -> Result<Self> {
        if bits == 0 || bit_errors > bits {
            return Err(invalid(format!("need 0 <= errors <= bits and bits > 0, got {bit_errors}/{bits}")));
        }
        let (lo, hi) = wilson_interval(bit_errors, bits, confidence)?;
        let ber = bit_errors as f64 / bits as f64;
        Ok(BerEstimate { bit_errors, bits, ber, ci_low: lo.min(ber), ci_high: hi.max(ber), confidence })
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    /// True when the two intervals share no point.
    pub fn separated_from(&self, other: &BerEstimate) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    if n == 0 {
        return Err(invalid("interval needs at least one trial"));
    }
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub per_user: Vec<BerEstimate>,
    pub pooled: BerEstimate,
    pub frames: u64,
    pub seed: u64,
    pub shards: usize,
}

fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

fn run_frame(
    params: &SystemParams,
    alloc: &Allocation,
    config: &SimConfig,
    seed: u64,
    frame: u64,
    errors: &mut [u64],
) -> Result<()> {
    let mut rng = frame_rng(seed, frame);
    let d = params.m - alloc.n();
    let bits: Vec<Vec<i8>> = (0..params.users)
        .map(|_| (0..d).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
        .collect();
    let seqs = user_sequences(params, alloc, config.map, config.burn_in, seed, frame)?;
    let tx = transmit_frame(params, alloc, &bits, &seqs)?;
    let rx = receive_frame(&awgn(&tx, params.n0, config.noise, &mut rng));
    for (p, (sent, got)) in bits.iter().zip(&rx.bits).enumerate() {
        errors[p] += sent.iter().zip(got).filter(|(s, g)| s != g).count() as u64;
    }
    Ok(())
}

/// Runs `trials` frames and returns per-user and pooled BER estimates.
pub fn estimate_ber(
    params: &SystemParams,
    alloc: &Allocation,
    trials: u64,
    seed: u64,
    mode: Mode,
    config: &SimConfig,
) -> Result<SimResult> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if config.shards == 0 {
        return Err(invalid("shards must be at least 1"));
    }
    let alloc = effective_alloc(alloc, mode);
    ensure_valid(params, &alloc, None)?;
    wilson_interval(0, 1, config.confidence)?;

    let shards = config.shards as u64;
    let per_shard: Vec<Vec<u64>> = (0..shards)
        .into_par_iter()
        .map(|s| -> Result<Vec<u64>> {
            let mut errors = vec![0u64; params.users];
            let (start, end) = (trials * s / shards, trials * (s + 1) / shards);
            for frame in start..end {
                run_frame(params, &alloc, config, seed, frame, &mut errors)?;
            }
            Ok(errors)
        })
        .collect::<Result<_>>()?;

    let mut errors = vec![0u64; params.users];
    for shard in &per_shard {
        for (acc, e) in errors.iter_mut().zip(shard) {
            *acc += e;
        }
    }
    let bits_per_user = trials * (params.m - alloc.n()) as u64;
    let per_user = errors
        .iter()
        .map(|&e| BerEstimate::new(e, bits_per_user, config.confidence))
        .collect::<Result<Vec<_>>>()?;
    let pooled = BerEstimate::new(errors.iter().sum(), bits_per_user * params.users as u64, config.confidence)?;
    Ok(SimResult { per_user, pooled, frames: trials, seed, shards: config.shards })
}

/// Frames needed so that each user sees at least `bits` data bits.
pub fn frames_for_bits(params: &SystemParams, n: usize, bits: u64) -> u64 {
    let per_frame = params.m.saturating_sub(n).max(1) as u64;
    bits.div_ceil(per_frame)
}

/// Per-dimension variance of the averaged-reference noise `R - sqrt(b) x`
/// for a single user with `n` references, as `(real, imaginary)`.
pub fn reference_noise_variance(
    params: &SystemParams,
    n: usize,
    frames: u64,
    seed: u64,
    config: &SimConfig,
) -> Result<(f64, f64)> {
    if frames == 0 {
        return Err(invalid("frames must be at least 1"));
    }
    let single = params.with_users(1);
    let alloc = Allocation::equal_power(n);
    ensure_valid(&single, &alloc, None)?;
    let sums = (0..frames)
        .into_par_iter()
        .map(|frame| -> Result<[f64; 4]> {
            let mut rng = frame_rng(seed, frame);
            let seqs = user_sequences(&single, &alloc, config.map, config.burn_in, seed, frame)?;
            let bits = vec![vec![1i8; single.m - n]];
            let tx = transmit_frame(&single, &alloc, &bits, &seqs)?;
            // Only the reference rows matter here.
            let obs = FrameObservation {
                users: 1,
                refs: n,
                beta: single.beta,
                ref_rx: add_noise(&tx.ref_tx, single.n0, config.noise, &mut rng),
                data_rx: Vec::new(),
            };
            let r = obs.averaged_reference(0);
            let mut s = [0.0; 4];
            for (r, x) in r.iter().zip(tx.ref_row(0, 0)) {
                let (er, ei) = (r.re - x, r.im);
                s[0] += er;
                s[1] += er * er;
                s[2] += ei;
                s[3] += ei * ei;
            }
            Ok(s)
        })
        .try_reduce(|| [0.0; 4], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]))?;
    let count = (frames * single.beta as u64) as f64;
    let var = |sum: f64, sq: f64| sq / count - (sum / count).powi(2);
    Ok((var(sums[0], sums[1]), var(sums[2], sums[3])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(users: usize, db: f64) -> SystemParams {
        SystemParams::from_ebn0_db(64, 128, users, db, 1.0).unwrap()
    }

    fn seqs(p: &SystemParams, alloc: &Allocation, frame: u64) -> Vec<ChaoticSequence> {
        user_sequences(p, alloc, ChaoticMap::Chebyshev, DEFAULT_BURN_IN, 9, frame).unwrap()
    }

    #[test]
    fn data_row_copies_reference_for_unit_power() {
        let p = params(1, 10.0);
        let alloc = Allocation::equal_power(12);
        let tx = transmit_frame(&p, &alloc, &[vec![1; 52]], &seqs(&p, &alloc, 0)).unwrap();
        assert_eq!(tx.data_row(0), tx.ref_row(0, 3));
        assert_eq!(tx.data_rows(), 52);
    }

    #[test]
    fn data_power_scales_amplitude() {
        let p = params(1, 10.0);
        let alloc = Allocation::new(4, 4.0, 1.0);
        let s = seqs(&p, &alloc, 0);
        let mut bits = vec![1i8; 60];
        bits[1] = -1;
        let tx = transmit_frame(&p, &alloc, &[bits], &s).unwrap();
        for (k, x) in s[0].chips.iter().enumerate() {
            assert_eq!(tx.data_row(0)[k], 2.0 * x);
            assert_eq!(tx.data_row(1)[k], -2.0 * x);
            assert_eq!(tx.ref_row(0, 0)[k], *x);
        }
    }

    #[test]
    fn energy_per_bit_is_eb() {
        for (n, a, b) in [(12, 1.0, 1.0), (3, 0.01, 0.3), (40, 2e-3, 7e-4)] {
            let p = params(1, 7.0);
            let alloc = Allocation::new(n, a, b);
            for frame in 0..20 {
                let bits = vec![(0..64 - n).map(|i| if (i + frame) % 3 == 0 { -1 } else { 1 }).collect()];
                let tx = transmit_frame(&p, &alloc, &bits, &seqs(&p, &alloc, frame as u64)).unwrap();
                let rel = (tx.energy_per_bit() - p.eb).abs() / p.eb;
                assert!(rel < 1e-9, "n={n} rel={rel}");
            }
        }
    }

    #[test]
    fn transmit_rejects_bad_shapes() {
        let p = params(2, 10.0);
        let alloc = Allocation::equal_power(4);
        let s = seqs(&p, &alloc, 0);
        assert!(transmit_frame(&p, &alloc, &[vec![1; 60]], &s).is_err());
        assert!(transmit_frame(&p, &alloc, &[vec![1; 60], vec![1; 59]], &s).is_err());
        assert!(transmit_frame(&p, &alloc, &[vec![1; 60], vec![0; 60]], &s).is_err());
        assert!(transmit_frame(&p, &alloc, &[vec![1; 60], vec![1; 60]], &s[..1]).is_err());
    }

    #[test]
    fn noiseless_decision_is_chip_energy() {
        let p = params(1, 10.0);
        let alloc = Allocation::equal_power(12);
        let s = seqs(&p, &alloc, 3);
        let bits: Vec<i8> = (0..52).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let tx = transmit_frame(&p, &alloc, &[bits.clone()], &s).unwrap();
        let rx = receive_frame(&awgn(&tx, 0.0, NoiseModel::Complex, &mut frame_rng(1, 1)));
        let ex = s[0].energy();
        // Chip energy is the (M-N)/M share of Eb.
        assert!((ex - 52.0 / 64.0 * p.eb).abs() < 1e-12 * p.eb);
        for (i, &z) in rx.stats[0].iter().enumerate() {
            assert!((z - bits[i] as f64 * ex).abs() <= 1e-12 * ex);
        }
        assert_eq!(rx.bits[0], bits);
    }

    #[test]
    fn noiseless_mean_over_frames() {
        let p = params(1, 10.0);
        let alloc = Allocation::equal_power(12);
        let target = 52.0 / 64.0 * p.eb;
        let mut sum = 0.0;
        for frame in 0..200 {
            let tx = transmit_frame(&p, &alloc, &[vec![1; 52]], &seqs(&p, &alloc, frame)).unwrap();
            let rx = receive_frame(&awgn(&tx, 0.0, NoiseModel::Complex, &mut frame_rng(2, frame)));
            sum += rx.stats[0].iter().sum::<f64>() / 52.0;
        }
        assert!((sum / 200.0 - target).abs() < 1e-9 * target);
    }

    #[test]
    fn zero_statistic_decodes_plus_one() {
        let obs = FrameObservation {
            users: 1,
            refs: 1,
            beta: 2,
            ref_rx: vec![Complex64::new(0.0, 0.0); 2],
            data_rx: vec![Complex64::new(1.0, 0.0); 2],
        };
        let rx = receive_frame(&obs);
        assert_eq!(rx.stats[0], vec![0.0]);
        assert_eq!(rx.bits[0], vec![1]);
    }

    #[test]
    fn noise_variance_and_determinism() {
        let frame = Frame { users: 1, refs: 1, beta: 1000, ref_tx: vec![0.0; 1000], data_tx: vec![0.0; 999_000] };
        let a = awgn(&frame, 2.0, NoiseModel::Complex, &mut frame_rng(4, 0));
        let b = awgn(&frame, 2.0, NoiseModel::Complex, &mut frame_rng(4, 0));
        assert_eq!(a, b);
        let samples = a.ref_rx.iter().chain(&a.data_rx);
        let (re, im) = samples.fold((0.0, 0.0), |acc, z| (acc.0 + z.re * z.re, acc.1 + z.im * z.im));
        let count = 1_000_000.0;
        assert!((re / count - 1.0).abs() < 0.02, "{}", re / count);
        assert!((im / count - 1.0).abs() < 0.02, "{}", im / count);
        let real = awgn(&frame, 2.0, NoiseModel::Real, &mut frame_rng(4, 0));
        assert!(real.data_rx.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn averaging_shrinks_reference_noise() {
        let p = params(1, 10.0);
        for n in [1, 4] {
            let (re, im) = reference_noise_variance(&p, n, 4000, 3, &SimConfig::default()).unwrap();
            let expected = 0.5 / n as f64;
            assert!((re / expected - 1.0).abs() < 0.05, "n={n} re={re}");
            assert!((im / expected - 1.0).abs() < 0.05, "n={n} im={im}");
        }
    }

    #[test]
    fn wilson_examples() {
        // mpmath at 30 digits, cross-checked with statsmodels' wilson method.
        let (lo, hi) = wilson_interval(5, 100, 0.99).unwrap();
        assert!((lo - 0.016_848_316_042_600_657).abs() < 1e-12, "{lo}");
        assert!((hi - 0.139_150_302_901_640_03).abs() < 1e-12, "{hi}");
        let (lo, hi) = wilson_interval(0, 10, 0.99).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.398_854_093_304_908_15).abs() < 1e-12, "{hi}");
        assert!(wilson_interval(1, 10, 1.0).is_err());
        assert!(BerEstimate::new(11, 10, 0.99).is_err());
    }

    #[test]
    fn coin_flip_regime() {
        let p = params(2, -30.0);
        let res = estimate_ber(&p, &Allocation::equal_power(8), 200, 5, Mode::Sa, &SimConfig::default()).unwrap();
        assert!((0.45..=0.55).contains(&res.pooled.ber), "{}", res.pooled.ber);
        assert_eq!(res.per_user.len(), 2);
        assert_eq!(res.pooled.bits, 2 * 200 * 56);
    }

    #[test]
    fn shard_count_does_not_change_result() {
        let p = params(2, 4.0);
        let alloc = Allocation::equal_power(6);
        let one = estimate_ber(&p, &alloc, 300, 77, Mode::Sa, &SimConfig { shards: 1, ..Default::default() }).unwrap();
        let many = estimate_ber(&p, &alloc, 300, 77, Mode::Sa, &SimConfig { shards: 7, ..Default::default() }).unwrap();
        assert_eq!(one.pooled, many.pooled);
        assert_eq!(one.per_user, many.per_user);
        let other = estimate_ber(&p, &alloc, 300, 78, Mode::Sa, &SimConfig::default()).unwrap();
        assert_ne!(one.pooled.bit_errors, other.pooled.bit_errors);
    }

    #[test]
    fn interval_halves_when_trials_quadruple() {
        // Doubling trials shrinks the width by ~1/sqrt(2).
        let p = params(1, 0.0);
        let alloc = Allocation::equal_power(4);
        let cfg = SimConfig::default();
        let small = estimate_ber(&p, &alloc, 400, 1, Mode::Sa, &cfg).unwrap().pooled;
        let big = estimate_ber(&p, &alloc, 800, 1, Mode::Sa, &cfg).unwrap().pooled;
        assert!(small.bit_errors >= 100);
        let ratio = big.ci_width() / small.ci_width();
        assert!((0.65..=0.75).contains(&ratio), "{ratio}");
    }

    #[test]
    fn ber_improves_with_snr() {
        let alloc = Allocation::equal_power(8);
        let cfg = SimConfig::default();
        let mut prev: Option<BerEstimate> = None;
        for db in [0.0, 4.0, 8.0, 12.0] {
            let est = estimate_ber(&params(1, db), &alloc, 400, 2, Mode::Sa, &cfg).unwrap().pooled;
            if let Some(prev) = prev {
                assert!(est.ber <= prev.ber || !est.separated_from(&prev), "{db} dB");
            }
            prev = Some(est);
        }
    }

    #[test]
    fn rejects_bad_runs() {
        let p = params(1, 10.0);
        let alloc = Allocation::equal_power(8);
        assert!(estimate_ber(&p, &alloc, 0, 1, Mode::Sa, &SimConfig::default()).is_err());
        assert!(estimate_ber(&p, &alloc, 1, 1, Mode::Sa, &SimConfig { shards: 0, ..Default::default() }).is_err());
        assert!(estimate_ber(&p, &Allocation::equal_power(64), 1, 1, Mode::Sa, &SimConfig::default()).is_err());
        assert!(estimate_ber(&p, &Allocation::new(4, -1.0, 1.0), 1, 1, Mode::Psa, &SimConfig::default()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn wilson_interval_brackets_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0, conf in 0.5f64..0.999) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(k, n, conf).unwrap();
            let phat = k as f64 / n as f64;
            proptest::prop_assert!(0.0 <= lo && lo <= phat + 1e-12);
            proptest::prop_assert!(phat - 1e-12 <= hi && hi <= 1.0);
        }

        #[test]
        fn wider_confidence_gives_wider_interval(n in 1u64..10_000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo1, hi1) = wilson_interval(k, n, 0.9).unwrap();
            let (lo2, hi2) = wilson_interval(k, n, 0.99).unwrap();
            proptest::prop_assert!(lo2 <= lo1 + 1e-15 && hi1 <= hi2 + 1e-15);
        }
    }
}
