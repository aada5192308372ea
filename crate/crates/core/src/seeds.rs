//! Deterministic seed derivation.
//!
//! A run seed `k` fans out into independent sub-seeds, one per purpose, as
//! `splitmix64(splitmix64(k) ^ (stream + 1) * 0x9E37_79B9_7F4A_7C15)`. The
//! stream numbers are fixed, so changing one consumer never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a derived random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Environment = 0,
    Expert = 1,
    Unsupervised = 2,
    InitialTheta = 3,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(seed) ^ (stream as u64 + 1).wrapping_mul(GOLDEN))
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}
