//! Seeded randomness. Every stochastic operation takes an explicit `(seed, stream)` pair.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type Rng = Xoshiro256StarStar;

const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// xoshiro256** seeded through splitmix64 from `seed` and a stream id.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    Xoshiro256StarStar::seed_from_u64(seed ^ stream.wrapping_add(1).wrapping_mul(STREAM_MIX))
}
