//! Counter-based seed derivation.
//!
//! Every random stream is a `ChaCha8Rng` seeded from `(master, index)`, so
//! replicates can run in any order on any number of workers.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`. For a fixed master the map
/// `index -> seed` is injective.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Uniform random permutation of `0..n` (Fisher–Yates) drawn from `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: BTreeSet<u64> = (0..10_000).map(|m| derive_seed(42, m)).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = permutation(50, 7);
        assert_eq!(p, permutation(50, 7));
        assert_ne!(p, permutation(50, 8));
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
