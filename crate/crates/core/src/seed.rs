//! Seed derivation and seeded sampling helpers.
//!
//! Every random decision in the pipeline draws from a ChaCha stream whose
//! seed is derived from a base seed plus string parts, so results do not
//! depend on execution order or platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from a base seed and an ordered list of labels.
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

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `n` distinct indices out of `0..len` in draw order (partial Fisher-Yates).
///
/// Panics if `n > len`; callers check availability first.
pub fn sample_indices<R: Rng>(rng: &mut R, len: usize, n: usize) -> Vec<usize> {
    assert!(n <= len, "cannot draw {n} of {len}");
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = rng.gen_range(i..len);
        pool.swap(i, j);
    }
    pool.truncate(n);
    pool
}

pub fn shuffle<T, R: Rng>(rng: &mut R, items: &mut [T]) {
    let len = items.len();
    for i in 0..len.saturating_sub(1) {
        let j = rng.gen_range(i..len);
        items.swap(i, j);
    }
}

/// Hex SHA-256 of a byte slice.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
