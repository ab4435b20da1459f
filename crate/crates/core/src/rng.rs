//! Seeded generators. Channel draws and receiver noise use separate ChaCha
//! streams so that a channel seed and a noise seed never share randomness,
//! even when the numeric seeds coincide.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHANNEL_STREAM: u64 = 0x6368_616e; // "chan"
const NOISE_STREAM: u64 = 0x6e6f_6973; // "nois"
const SEARCH_STREAM: u64 = 0x7365_6172; // "sear"

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn channel_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, CHANNEL_STREAM)
}

pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, NOISE_STREAM)
}

pub fn search_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, SEARCH_STREAM)
}

/// SplitMix64 finalizer; derives well-spread child seeds from `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
