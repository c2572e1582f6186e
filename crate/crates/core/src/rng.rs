//! Deterministic randomness.
//!
//! Every random quantity is addressed by a key rather than drawn from a
//! shared mutable generator: sample rows by `(seed, row)`, trial and node
//! seeds by mixing `(seed, trial, node)`. Results therefore do not depend on
//! evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `(trial, node)` derived from a root seed.
pub fn derive_seed(seed: u64, trial: u64, node: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ trial) ^ node.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Generator for one sample row. Rows of the same seed use disjoint ChaCha
/// streams, so row `t` can be regenerated without touching rows `0..t`.
pub fn row_rng(seed: u64, row: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row);
    rng
}

/// General-purpose generator for model construction.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed))
}
