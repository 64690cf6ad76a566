//! Reproducible random streams.
//!
//! A [`RngStream`] is a `(master_seed, stream_id)` pair. The generator behind
//! it is ChaCha8, whose 64-bit stream selector gives O(1) access to
//! independent, platform-stable sequences: replica `r` of an experiment
//! seeded with `s` always sees the same draws regardless of which worker
//! thread picks it up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Derive a child stream. Children of distinct parents or with distinct
    /// labels get distinct ids (up to 64-bit hash collisions).
    pub fn substream(&self, label: u64) -> RngStream {
        RngStream {
            master_seed: self.master_seed,
            stream_id: splitmix64(splitmix64(self.stream_id) ^ label.wrapping_mul(0xD6E8_FEB8_6659_FD93)),
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
