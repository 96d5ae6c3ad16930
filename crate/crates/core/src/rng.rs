//! Reproducible random streams.
//!
//! Every random quantity comes from a xoshiro256++ generator seeded through
//! splitmix64. Independent substreams (one per sample, per axis, ...) are
//! derived from a master seed and a stream index, so results do not depend
//! on how work is scheduled across threads.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// One splitmix64 output for state `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for substream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(splitmix64(seed ^ splitmix64(index.wrapping_add(1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // Reference sequence for seed 0 (state advanced by the golden gamma).
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(42, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| stream(42, 3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = stream(42, 3).random();
        let y: u64 = stream(42, 4).random();
        assert_ne!(x, y);
    }
}
