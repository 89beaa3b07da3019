//! Seed derivation.
//!
//! Every random stream in the simulator is a `ChaCha8Rng` keyed by a 64-bit
//! seed. Child seeds are derived from a parent and a tag with SplitMix64 so
//! independent streams never depend on the order in which they are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator algorithm, as written in config files.
pub const GENERATOR_NAME: &str = "chacha8";

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `tag` of `parent`.
pub fn derive(parent: u64, tag: u64) -> u64 {
    mix64(mix64(parent) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Uniform draw in the open interval (0, 1) from a 64-bit hash.
pub fn hash_to_open_unit(h: u64) -> f64 {
    // 52 bits, offset by half an ulp so 0 is never produced.
    ((h >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}
