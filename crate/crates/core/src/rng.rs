//! Deterministic keyed random streams.
//!
//! Every random draw in the crate comes from a [`Seed`]: a 64-bit key plus a
//! 64-bit stream id feeding a ChaCha8 keystream. Independent streams (per
//! client, per hash row, per round) are obtained with [`Seed::derive`], which
//! hashes the parent seed together with a text label. Nothing depends on
//! global state, thread scheduling or platform endianness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The concrete generator behind every stream.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed {
    pub value: u64,
    pub stream_id: u64,
}

impl Seed {
    pub const fn new(value: u64) -> Self {
        Seed { value, stream_id: 0 }
    }

    pub const fn with_stream(value: u64, stream_id: u64) -> Self {
        Seed { value, stream_id }
    }

    /// Child seed for `label`. Distinct labels give unrelated keys.
    pub fn derive(&self, label: &str) -> Seed {
        let mut h = Sha256::new();
        h.update(b"dme/derive/v1");
        h.update(self.value.to_le_bytes());
        h.update(self.stream_id.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        let out = h.finalize();
        let mut a = [0u8; 8];
        let mut b = [0u8; 8];
        a.copy_from_slice(&out[..8]);
        b.copy_from_slice(&out[8..16]);
        Seed {
            value: u64::from_le_bytes(a),
            stream_id: u64::from_le_bytes(b),
        }
    }

    /// Shorthand for `derive(&format!("{prefix}:{index}"))`.
    pub fn derive_indexed(&self, prefix: &str, index: usize) -> Seed {
        self.derive(&format!("{prefix}:{index}"))
    }

    pub fn rng(&self) -> StreamRng {
        let mut h = Sha256::new();
        h.update(b"dme/key/v1");
        h.update(self.value.to_le_bytes());
        let key: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Free-function form of [`Seed::derive`].
pub fn derive_stream(root: Seed, label: &str) -> Seed {
    root.derive(label)
}
