//! Seeded random streams. Every random quantity in the crate is drawn from a
//! ChaCha stream keyed by `(master seed, stream index)`, so results never
//! depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform double in the open interval (0, 1).
pub fn open_unit(rng: &mut impl Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..len` without modulo bias.
pub fn index(rng: &mut impl Rng, len: usize) -> usize {
    debug_assert!(len > 0);
    let len = len as u64;
    let zone = u64::MAX - (u64::MAX % len);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % len) as usize;
        }
    }
}

/// Seed for trial `index` of a sweep driven by `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = stream(master, index);
    rng.next_u64()
}
