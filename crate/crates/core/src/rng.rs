//! Deterministic PRNG substreams.
//!
//! Every episode, evaluation run and shuffle draws from its own generator
//! derived from the experiment seed plus a key path, so results do not depend
//! on the order in which work is scheduled.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Key-path tags that separate the purposes a substream is used for.
pub mod tag {
    pub const ENV: u64 = 1;
    pub const ACTION: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const INIT: u64 = 4;
    pub const EVAL: u64 = 5;
    pub const FIXED_MODEL: u64 = 6;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator keyed by `(seed, keys...)`.
pub fn substream(seed: u64, keys: &[u64]) -> StreamRng {
    let mut h = splitmix64(seed);
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    StreamRng::seed_from_u64(h)
}
