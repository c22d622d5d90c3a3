//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator (counter-based, platform independent)
//! whose 64-bit seed is derived by folding the key path through the
//! SplitMix64 finalizer:
//!
//! ```text
//! h0 = mix(seed); h(i+1) = mix(h(i) ^ mix(key[i] + 0x9E3779B97F4A7C15))
//! ```
//!
//! so `substream(seed, &[entry])` gives each corpus entry its own stream
//! regardless of processing order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, key: &[u64]) -> u64 {
    key.iter()
        .fold(mix(seed), |h, &k| mix(h ^ mix(k.wrapping_add(GOLDEN))))
}

pub fn substream(seed: u64, key: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, key))
}
