//! Deterministic per-replication random streams.
//!
//! Every replication gets its own ChaCha8 stream whose seed is a SplitMix64
//! mix of `(master, cell, rep)`, so aggregates do not depend on execution
//! order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a sequence of words into one 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C909u64, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Stream for replication `rep` of cell `cell` under `master`.
pub fn stream(master: u64, cell: u64, rep: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[master, cell, rep]))
}

pub fn from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[seed]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 1, 3).random();
        let b: u64 = stream(7, 1, 3).random();
        let c: u64 = stream(7, 1, 4).random();
        let d: u64 = stream(7, 2, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
