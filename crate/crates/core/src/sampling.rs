//! Seeded randomness for protocol rounds and Monte-Carlo batches.
//!
//! Every stream is a ChaCha8 generator seeded through `SeedableRng::seed_from_u64`.
//! Monte-Carlo batches are split into fixed-size chunks; chunk `k` of a batch
//! with seed `s` draws from the stream seeded with `chunk_seed(s, k)`, so merged
//! counts do not depend on how many workers processed the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type ProtocolRng = ChaCha8Rng;

/// Trials per Monte-Carlo chunk.
pub const CHUNK_TRIALS: u64 = 1 << 14;

pub fn rng_from_seed(seed: u64) -> ProtocolRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `seed + (chunk + 1) * golden_gamma`.
pub fn chunk_seed(seed: u64, chunk: u64) -> u64 {
    let mut z = seed.wrapping_add(chunk.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws index `k` with probability `weights[k] / Σ weights`.
///
/// `weights` must be nonnegative with a positive sum.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "sample_index needs positive total weight");
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding slack at the top end
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
