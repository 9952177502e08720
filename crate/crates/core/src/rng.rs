//! Seed handling for reproducible replications.
//!
//! Every run owns a private [`ChaCha8Rng`] seeded from a 64-bit value. Batch
//! seeds are derived from `(master_seed, run_index)` with a SplitMix64
//! finalizer, so run `i` sees the same stream no matter which worker thread
//! executes it or how many workers exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used by simulations.
pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `index` under `master_seed`.
///
/// `splitmix64(splitmix64(master) ^ index * GOLDEN_GAMMA)`. Injective in
/// `index` for a fixed master seed, since both steps are bijections on `u64`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(GOLDEN_GAMMA))
}

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
