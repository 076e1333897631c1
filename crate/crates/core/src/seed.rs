//! All randomness in the crate flows through here.
//!
//! A single user-facing seed fans out to independent sub-seeds by hashing the
//! seed together with a scope name, so each stage stays reproducible on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha8Rng;

/// Derive a sub-seed for `scope` from `seed`.
pub fn derive_seed(seed: u64, scope: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(scope.as_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output has 32 bytes"))
}

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scoped_rng(seed: u64, scope: &str) -> SeededRng {
    rng(derive_seed(seed, scope))
}
