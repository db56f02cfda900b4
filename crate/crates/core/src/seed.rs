//! Deterministic seed derivation for Monte Carlo streams.
//!
//! Every random quantity in an experiment is drawn from a generator seeded
//! by a child seed `hash(master, label, index)`. Draws can therefore be
//! evaluated in any order, or in parallel, and still produce identical
//! results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A 64-bit master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub const fn new(master: u64) -> Self {
        RngSeed(master)
    }

    /// Derives the seed of the `index`-th draw of the stream named `label`.
    pub fn child(self, label: &str, index: u64) -> RngSeed {
        let mut hasher = Sha256::new();
        hasher.update(self.0.to_le_bytes());
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update(index.to_le_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        RngSeed(u64::from_le_bytes(bytes))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}
