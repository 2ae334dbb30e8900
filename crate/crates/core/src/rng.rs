//! Seeded randomness shared by split generation, simulation and synthesis.
//!
//! Everything goes through ChaCha8 seeded with `seed_from_u64`, so a
//! `(seed, stream)` pair pins the output regardless of thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of generator `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `0..bound` by 128-bit multiply-shift of one `u64` draw.
pub fn below(rng: &mut impl RngCore, bound: usize) -> usize {
    debug_assert!(bound > 0);
    ((u128::from(rng.next_u64()) * bound as u128) >> 64) as usize
}

/// In-place Fisher-Yates: for `i` from `len-1` down to 1, swap `i` with
/// `below(i + 1)`.
pub fn fisher_yates<T>(items: &mut [T], rng: &mut impl RngCore) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
