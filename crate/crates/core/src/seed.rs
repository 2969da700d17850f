//! Seed derivation and counter-based uniforms.
//!
//! Every stochastic step in the crate draws from a seed derived from the
//! caller's base seed plus a stream index, so results never depend on
//! execution order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based split: the `stream`-th child of `seed`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_mul(GOLDEN) ^ 0xD1B5_4A32_D192_ED03))
}

/// Child seed addressed by a path of stream indices.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &p| derive(s, p))
}

/// A seeded stream RNG for the less hot paths (scene sampling, shuffles).
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniform draw in the open interval (0, 1), addressed by `(key, counter)`.
pub fn unit_uniform(key: u64, counter: u64) -> f64 {
    let bits = derive(key, counter) >> 11;
    (bits as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard Gumbel draw addressed by `(key, counter)`.
pub fn gumbel(key: u64, counter: u64) -> f64 {
    -(-unit_uniform(key, counter).ln()).ln()
}

/// Stable stream labels so different consumers of one seed never collide.
pub mod streams {
    pub const PLANT: u64 = 0x504C_414E;
    pub const CORRUPT: u64 = 0x434F_5252;
    pub const DECODE: u64 = 0x4445_434F;
    pub const VERIFY: u64 = 0x5645_5249;
    pub const TIES: u64 = 0x5449_4553;
    pub const CANDIDATES: u64 = 0x4341_4E44;
    pub const SUITE: u64 = 0x5355_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const PROMPTS: u64 = 0x5052_4F4D;
    pub const OUTCOME: u64 = 0x4F55_5443;
}
