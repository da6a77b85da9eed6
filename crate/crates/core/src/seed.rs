//! Counter-style seed derivation.
//!
//! Every random object is drawn from a stream identified by a master seed and
//! an ordered list of `(tag, index)` labels. The stream key is a SHA-256
//! digest of that identity, so any party holding the same labels (an agent
//! ID, a column index) regenerates the same values without communication.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"distrvfl/seed/v1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_labels: Vec<(String, u64)>,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_labels: Vec::new(),
        }
    }

    /// Child stream with one more label appended.
    pub fn with(&self, tag: &str, index: u64) -> Self {
        let mut stream_labels = self.stream_labels.clone();
        stream_labels.push((tag.to_owned(), index));
        Self {
            master_seed: self.master_seed,
            stream_labels,
        }
    }

    fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN);
        hasher.update(self.master_seed.to_le_bytes());
        for (tag, index) in &self.stream_labels {
            hasher.update((tag.len() as u32).to_le_bytes());
            hasher.update(tag.as_bytes());
            hasher.update(index.to_le_bytes());
        }
        let mut out = [0u8; 32];
        out.copy_from_slice(&hasher.finalize());
        out
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.digest())
    }

    /// A single 64-bit value derived from the stream identity.
    pub fn derive_u64(&self) -> u64 {
        let d = self.digest();
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }
}
