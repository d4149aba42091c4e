//! Per-task random streams.
//!
//! Every unit of stochastic work (one acquisition, one sampled model) gets
//! its own ChaCha stream keyed by the run seed plus a path of indices, so
//! results do not depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A generator determined by `seed` and the index path `stream`.
pub fn stream_rng(seed: u64, stream: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for (depth, &s) in stream.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(s.wrapping_add((depth as u64 + 1) << 56)));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        h = splitmix64(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
