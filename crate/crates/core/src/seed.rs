//! Hierarchical seed derivation.
//!
//! Every stochastic stage draws from its own generator whose seed is derived
//! from a parent seed and a labeled path (`trial/3/step/17/committee`). Streams
//! therefore do not depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type StageRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of the child stream `label/index` below `parent`.
pub fn derive(parent: u64, label: &str, index: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    let a = splitmix64(parent ^ h);
    splitmix64(a ^ splitmix64(index.wrapping_add(h.rotate_left(17))))
}

/// Seeded generator for the child stream `label/index` below `parent`.
pub fn stream(parent: u64, label: &str, index: u64) -> StageRng {
    StageRng::seed_from_u64(derive(parent, label, index))
}

/// Generator seeded directly from `seed`.
pub fn rng(seed: u64) -> StageRng {
    StageRng::seed_from_u64(seed)
}
