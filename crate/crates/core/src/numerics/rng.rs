//! Reproducible random streams.
//!
//! A [`SeededStream`] is a ChaCha20 generator keyed by a 64-bit base seed and
//! positioned on one of its 2⁶⁴ independent streams. The bit-level recipe is:
//!
//! * key: four successive SplitMix64 outputs of `base_seed`, each written
//!   little-endian into 8 bytes of the 32-byte ChaCha key;
//! * stream: the ChaCha stream (nonce) word is set to `stream_id`;
//! * replication streams: `stream_id = splitmix64(splitmix64(experiment_id) ^ replication)`.
//!
//! Because `splitmix64` is a bijection on `u64`, distinct replication indices
//! under one experiment always land on distinct streams, and each stream's
//! variates depend only on its own `(base_seed, stream_id)` pair.

use rand::{Error as RandError, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `x + γ`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a label, used to turn setting names into experiment ids.
pub fn stable_id(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct SeededStream {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl SeededStream {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = base_seed;
        for chunk in key.chunks_exact_mut(8) {
            let word = splitmix64(state);
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream_id);
        Self {
            base_seed,
            stream_id,
            rng,
        }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream, a pure function of `(base_seed, stream_id, child)`.
    ///
    /// The parent's position is not consumed, so forks are stable no matter
    /// how many variates the parent has already produced.
    pub fn fork(&self, child: u64) -> Self {
        Self::new(
            self.base_seed,
            splitmix64(self.stream_id ^ splitmix64(child.wrapping_add(1))),
        )
    }
}

/// Stream for replication `replication` of experiment `experiment_id`.
pub fn derive_stream(base_seed: u64, experiment_id: u64, replication: u64) -> SeededStream {
    SeededStream::new(
        base_seed,
        splitmix64(splitmix64(experiment_id) ^ replication),
    )
}

impl RngCore for SeededStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.rng.try_fill_bytes(dest)
    }
}
