//! Deterministic seed derivation and the pinned input generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in run manifests for the seed mixer and generator.
pub const RNG_ALGORITHM: &str = "splitmix64-fold/chacha8(seed_from_u64)";

/// The generator used for every random input.
pub type InputRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the run coordinates into a per-input seed.
///
/// Each coordinate is folded in with a round of splitmix64, which is a
/// bijection on `u64`, so seeds differing in exactly one coordinate never
/// collide.
pub fn derive_seed(master_seed: u64, representative: u8, input_index: u32, symmetry_index: u8) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ representative as u64);
    h = splitmix64(h ^ input_index as u64);
    splitmix64(h ^ symmetry_index as u64)
}

pub fn input_rng(seed: u64) -> InputRng {
    ChaCha8Rng::seed_from_u64(seed)
}
