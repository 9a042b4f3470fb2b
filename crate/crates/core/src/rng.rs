//! Counter-based random streams.
//!
//! Every stream is keyed by `(seed, purpose, index)`. Drawing from one stream
//! never perturbs another, so parallel work units that each derive their own
//! stream produce the same numbers regardless of scheduling or thread count.

use rand::rand_core::{impls, RngCore};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A keyed counter generator: output `n` is a bijective mix of `key + n * GOLDEN`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, purpose: &str, index: u64) -> Self {
        let key =
            mix64(seed ^ mix64(fnv1a64(purpose.as_bytes()) ^ mix64(index.wrapping_add(GOLDEN))));
        Self { key, counter: 0 }
    }

    /// Child stream; the parent is left untouched.
    pub fn derive(&self, purpose: &str, index: u64) -> Self {
        Self::new(self.key, purpose, index)
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN))) ^ self.key)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
