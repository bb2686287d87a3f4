//! Counter-based seed derivation.
//!
//! Every random stream in a simulation is keyed by a tuple of integers
//! (master seed, grid point, trial, iteration, purpose). The tuple is folded
//! through the SplitMix64 finalizer, so a stream depends only on its key and
//! never on the order in which other streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a key tuple into a single 64-bit seed.
pub fn derive(key: &[u64]) -> u64 {
    key.iter().fold(GOLDEN, |acc, &k| {
        mix(acc.wrapping_add(GOLDEN) ^ mix(k.wrapping_add(GOLDEN)))
    })
}

/// A ChaCha8 generator seeded from a key tuple.
pub fn rng(key: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(key))
}
