//! Deterministic, splittable random-number streams.
//!
//! Reproducibility contract: every consumer of randomness receives an
//! [`RngStream`] whose key is derived from its parent's key and a tag via
//! [`mix`].  Child derivation never depends on how much of the parent has
//! been consumed, so a sharded computation draws identical numbers no matter
//! how shards are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented 64-bit mix of a parent seed and a stream tag:
/// `splitmix64(seed XOR (tag * 0xA24BAED4963EE407))`.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ tag.wrapping_mul(0xA24B_AED4_963E_E407))
}

/// A single-owner random stream with deterministic child derivation.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        RngStream {
            key: seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derive an independent child stream. Depends only on this stream's
    /// key and the tag, never on consumption state.
    pub fn child(&self, tag: u64) -> RngStream {
        RngStream::from_seed(mix(self.key, tag))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::random::<f64>(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
