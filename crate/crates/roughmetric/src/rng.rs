//! Deterministic random streams.
//!
//! Every sampling task derives its own ChaCha8 stream from a master seed
//! and a task label, so results are independent of evaluation order and of
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derives independent substreams from one master seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Stream for a named task. The label hash keeps streams for different
    /// tasks decorrelated even with small seeds.
    pub fn stream(&self, label: &str, index: u64) -> ChaCha8Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        h ^= index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        ChaCha8Rng::seed_from_u64(self.master ^ h)
    }
}

/// Uniform sample in `[0, 1)`.
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>()
}
