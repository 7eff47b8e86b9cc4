//! Seeded randomness. Every random draw in the crate goes through a
//! [`SplitMix64`] stream so that a seed fully determines the output.

use rand::{Rng, SeedableRng};
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut SplitMix64, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Probe inputs for equivariance checks: entries uniform in `[-2, 4]`, so a
/// threshold at 3 sees values on both sides.
pub fn probe_vec(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    uniform_vec(rng, len, -2.0, 4.0)
}
