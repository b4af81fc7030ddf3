//! Seeded sampling primitives shared by every stochastic component.
//!
//! All randomness flows through [`ChaCha8Rng`] seeded with
//! `seed_from_u64`, so a seed fully determines the output across platforms.
//! Sampling without replacement is a partial Fisher-Yates shuffle: for
//! `i in 0..m`, draw `j` uniformly from `i..n` and swap positions `i` and `j`;
//! the first `m` slots are the sample, in draw order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `m` distinct indices from `0..n` in draw order. `m` is clamped to `n`.
pub fn sample_indices<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<usize> {
    let m = m.min(n);
    let mut slots: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        slots.swap(i, j);
    }
    slots.truncate(m);
    slots
}

/// Full seeded permutation of `0..n`.
pub fn shuffled_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    sample_indices(rng, n, n)
}

/// Derives a child seed from a base seed and a list of labels, so that
/// independent units of work get stable, uncorrelated streams regardless of
/// the order in which they are processed.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}
