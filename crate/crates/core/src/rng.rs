//! Seeded random substreams.
//!
//! A run owns one root seed. Each consumer (session arrivals, failure
//! injection, recovery draws, ...) asks for its own stream by name, so adding
//! or reordering draws in one consumer never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator type used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Derives an independent generator from `(seed, name)` by hashing both.
pub fn substream(seed: u64, name: &str) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}
