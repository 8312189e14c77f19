//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit is a ChaCha generator keyed by a seed
//! derived from a master seed and a tuple of coordinates, so draws for one
//! feature, tree, or grid cell never depend on the order other streams were
//! consumed in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of coordinates into a new seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stable 64-bit FNV-1a hash for string coordinates (method names, tags).
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn rng_from(master: u64, parts: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(master, parts))
}
