//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`seeded_rng`]: ChaCha with 8
//! rounds (`rand_chacha::ChaCha8Rng`), keyed by expanding the 64-bit seed
//! with `SeedableRng::seed_from_u64` and selecting the 64-bit ChaCha stream
//! id. Both steps are fixed algorithms, so a `(seed, stream)` pair yields the
//! same sequence on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TopicRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64, stream: u64) -> TopicRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one `(topics, run)` cell of a sweep:
/// `splitmix64(splitmix64(base ^ splitmix64(topics)) ^ run)`.
pub fn derive_seed(base_seed: u64, topics: usize, run: usize) -> u64 {
    splitmix64(splitmix64(base_seed ^ splitmix64(topics as u64)) ^ run as u64)
}
