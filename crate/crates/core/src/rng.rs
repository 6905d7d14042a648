//! Reproducible random streams.
//!
//! A stream is addressed by `(master_seed, stream_id)`. Both words are mixed
//! into a single 64-bit seed for a ChaCha8 generator, so any two distinct
//! stream ids give statistically independent streams and the same pair always
//! gives the same bits on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// The 64-bit seed this stream expands from.
    pub fn seed(&self) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(self.stream_id ^ 0x6a09_e667_f3bc_c908))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        rng_from_seed(self.seed())
    }

    /// A sub-stream keyed by `id`, used to fan one stream out to workers.
    pub fn child(&self, id: u64) -> RngSpec {
        RngSpec::new(self.seed(), id)
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a word sequence. Stable across builds, unlike
/// `std::hash::DefaultHasher`.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}
