//! Replicate seed derivation.
//!
//! A seed is `splitmix64` chained over the master seed and four words: the
//! FNV-1a hash of the experiment tag, `n`, a stream id and the replicate index.
//! Each sketching method uses the FNV-1a hash of its label as stream id; data
//! generation uses [`DATA_STREAM`], so every method in a replicate sees the
//! same sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for the data of a replicate.
pub const DATA_STREAM: u64 = 0x6461_7461; // "data"

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(master: u64, experiment: &str, n: usize, stream: u64, replicate: usize) -> u64 {
    [fnv1a(experiment), n as u64, stream, replicate as u64]
        .into_iter()
        .fold(splitmix64(master), |h, word| splitmix64(h ^ word))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
