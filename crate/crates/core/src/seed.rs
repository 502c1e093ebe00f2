//! Schedule-independent seed derivation.
//!
//! Every stochastic unit of work (a metric pair, a permutation iteration, a
//! split-half draw, an outer simulation iteration) gets its own generator seeded
//! from the master seed and the unit's coordinates, so results never depend on
//! how work is distributed across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `coords` into `master`, order-sensitively.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng_for(master: u64, coords: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, coords))
}
