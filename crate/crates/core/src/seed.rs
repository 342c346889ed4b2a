//! Seed derivation for reproducible parallel chains.
//!
//! Every chain gets its own generator seeded by folding a path of tags into
//! the master seed with the splitmix64 finaliser. The chain `i` of phase `φ`
//! in a ratio estimate seeded with `base` uses `derive_seed(base, &[φ, i])`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used for every chain.
pub type ChainRng = Xoshiro256PlusPlus;

/// Tag for weight-learning estimates: path `[LEARN, stage, pair_index]`.
pub const LEARN: u64 = 0x4c45_4152_4e00_0001;
/// Tag for the final covariance estimate: path `[FINAL]`.
pub const FINAL: u64 = 0x4649_4e41_4c00_0002;
/// Tag for diagnostic runs of the chain.
pub const DIAGNOSTIC: u64 = 0x4449_4147_0000_0003;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

pub fn chain_rng(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}
