//! Seeded random streams.
//!
//! A trial's stream is addressed by `(master seed, trial index, module tag)`:
//! the master seed becomes the ChaCha key and the `(trial, tag)` pair selects
//! the ChaCha stream. Streams for different modules or trials never share
//! draws, so the order in which modules consume randomness cannot perturb
//! one another.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAG_BITS: u32 = 8;

/// Module tags used to address per-trial substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamTag {
    Schedule = 1,
    Signal = 2,
    Attack = 3,
    Emitter = 4,
    Detector = 5,
    Calibration = 6,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Deterministic random stream backed by ChaCha8.
#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        RandomStream(ChaCha8Rng::from_seed(key_from_seed(seed)))
    }

    /// Substream for one module of one trial.
    pub fn for_trial(master_seed: u64, trial: u64, tag: StreamTag) -> Self {
        assert!(trial < (1u64 << (64 - TAG_BITS)), "trial index too large");
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(master_seed));
        rng.set_stream((trial << TAG_BITS) | tag as u64);
        RandomStream(rng)
    }

    /// Public identifier of a trial's streams, recorded in results.
    pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
        let mut state = master_seed ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03);
        splitmix64(&mut state)
    }

    /// Derives an independent child stream; consumes 32 bytes of `self`.
    pub fn fork(&mut self, tag: u64) -> Self {
        let mut key = [0u8; 32];
        self.0.fill_bytes(&mut key);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(tag);
        RandomStream(rng)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
