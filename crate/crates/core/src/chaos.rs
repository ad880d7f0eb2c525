//! Chaotic spreading sequences.
//!
//! A sequence is `beta` real chips produced by iterating a one-dimensional
//! chaotic map from a seed-derived initial state. After a burn-in the raw
//! orbit is mean-removed, since the decision-statistic moments assume
//! zero-mean chips, and then scaled to the energy the link budget requires.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BURN_IN: usize = 1024;
pub const LOGISTIC_R: f64 = 3.9999;
const MAX_RESEEDS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChaoticMap {
    /// Second-order Chebyshev polynomial map `x -> 1 - 2x^2` on (-1, 1).
    #[default]
    Chebyshev,
    /// Logistic map `x -> r x (1 - x)` on (0, 1) with `r = 3.9999`.
    Logistic,
}

impl ChaoticMap {
    #[inline]
    pub fn step(self, x: f64) -> f64 {
        match self {
            ChaoticMap::Chebyshev => 1.0 - 2.0 * x * x,
            ChaoticMap::Logistic => LOGISTIC_R * x * (1.0 - x),
        }
    }

    /// Maps a seed to an initial state inside the open domain of the map.
    fn initial_state(self, seed: u64) -> f64 {
        // 53 random bits, offset by half an ulp so the endpoints are excluded.
        let u = ((splitmix64(seed) >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        match self {
            ChaoticMap::Chebyshev => 2.0 * u - 1.0,
            ChaoticMap::Logistic => u,
        }
    }

    /// Whether `x` sits on (or numerically at) a fixed point or the preimage
    /// of one, so the orbit would collapse.
    fn is_degenerate(self, x: f64) -> bool {
        const TOL: f64 = 1e-12;
        let near = |p: f64| (x - p).abs() < TOL;
        match self {
            ChaoticMap::Chebyshev => near(0.0) || near(1.0) || near(-1.0) || near(0.5) || near(-0.5),
            ChaoticMap::Logistic => {
                let fixed = 1.0 - 1.0 / LOGISTIC_R;
                near(0.0) || near(1.0) || near(0.5) || near(fixed)
            }
        }
    }
}

/// Real chip vector of one spreading sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaoticSequence {
    pub chips: Vec<f64>,
}

impl ChaoticSequence {
    pub fn new(chips: Vec<f64>) -> Self {
        ChaoticSequence { chips }
    }

    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|c| c * c).sum()
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// Normalized cross-correlation `<x, y> / (|x| |y|)`.
    pub fn correlation(&self, other: &ChaoticSequence) -> f64 {
        let dot: f64 = self.chips.iter().zip(&other.chips).map(|(x, y)| x * y).sum();
        dot / (self.energy() * other.energy()).sqrt()
    }
}

/// Generates a mean-removed chaotic sequence of `beta` chips.
///
/// Seeds whose orbit is degenerate are replaced by `seed + 1`, up to eight
/// times. With `beta == 1` the mean is left in place, otherwise the only
/// chip would be zeroed.
pub fn generate(map: ChaoticMap, seed: u64, beta: usize, burn_in: usize) -> Result<ChaoticSequence> {
    if beta == 0 {
        return Err(crate::error::invalid("beta must be at least 1"));
    }
    let mut chips = Vec::with_capacity(beta);
    for retry in 0..=MAX_RESEEDS {
        let s = seed.wrapping_add(retry as u64);
        if fill_orbit(map, s, beta, burn_in, &mut chips) {
            return Ok(ChaoticSequence { chips });
        }
    }
    Err(Error::DegenerateSequence { seed, retries: MAX_RESEEDS })
}

// Writes the orbit into `chips`; false if it collapsed.
fn fill_orbit(map: ChaoticMap, seed: u64, beta: usize, burn_in: usize, chips: &mut Vec<f64>) -> bool {
    chips.clear();
    let mut x = map.initial_state(seed);
    if map.is_degenerate(x) {
        return false;
    }
    for _ in 0..burn_in {
        x = map.step(x);
    }
    for _ in 0..beta {
        if !x.is_finite() || map.is_degenerate(x) {
            return false;
        }
        chips.push(x);
        x = map.step(x);
    }
    if beta > 1 {
        let mean = chips.iter().sum::<f64>() / beta as f64;
        chips.iter_mut().for_each(|c| *c -= mean);
    }
    chips.iter().any(|&c| c != 0.0)
}

/// Rescales `seq` so that its energy equals `target_energy`.
pub fn normalize_energy(seq: &ChaoticSequence, target_energy: f64) -> Result<ChaoticSequence> {
    if !(target_energy.is_finite() && target_energy > 0.0) {
        return Err(crate::error::invalid(format!("target energy must be positive, got {target_energy}")));
    }
    let energy = seq.energy();
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::ZeroEnergy);
    }
    let scale = (target_energy / energy).sqrt();
    Ok(ChaoticSequence { chips: seq.chips.iter().map(|c| c * scale).collect() })
}

/// Counter-based seed mixer (SplitMix64 finalizer).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from a base seed and a list of counters.
pub fn derive_seed(base: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}
