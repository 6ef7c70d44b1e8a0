//! Seeded random streams.
//!
//! A single `u64` seed determines every stream: trial `t` of an experiment
//! draws from ChaCha20 stream `t` under that seed, so trials can run in any
//! order (or in parallel) and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
