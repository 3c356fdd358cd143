//! Seeded random streams.
//!
//! Every replicate draws from its own ChaCha8 stream whose 64-bit seed is
//! `splitmix64(master ⊕ splitmix64(index + 1))`. ChaCha8 output is specified
//! bit-for-bit and platform independent, so a replicate's draws depend only on
//! `(master, index)`, never on which worker thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Stream for replicate `index` under `master`.
pub fn substream(master: u64, index: u64) -> Stream {
    Stream::seed_from_u64(substream_seed(master, index))
}

/// Stream for a whole computation seeded directly.
pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}
