//! Value-semantic random streams.
//!
//! A [`RandomStream`] is a `(seed, label)` pair. It owns no generator state:
//! every call to [`RandomStream::rng`] returns a fresh ChaCha8 generator keyed
//! by SHA-256 of the pair, so the same stream always replays the same draws.
//! Child streams extend the label, which lets independent work items (users,
//! batches, robust repetitions) draw from disjoint sequences regardless of the
//! order in which they are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    label: String,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            label: String::new(),
        }
    }

    pub fn with_label(seed: u64, label: impl Into<String>) -> Self {
        RandomStream {
            seed,
            label: label.into(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derives a child stream whose label is `parent/part`.
    pub fn child(&self, part: impl fmt::Display) -> Self {
        let label = if self.label.is_empty() {
            part.to_string()
        } else {
            format!("{}/{}", self.label, part)
        };
        RandomStream {
            seed: self.seed,
            label,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }
}

impl fmt::Debug for RandomStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RandomStream({}:{})", self.seed, self.label)
    }
}
