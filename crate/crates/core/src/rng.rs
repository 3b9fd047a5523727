//! Deterministic RNG streams for the experiment loop.
//!
//! Every random decision in a run is drawn from a stream derived from
//! `(master seed, iteration, role)`. Checkpoints therefore only need to
//! record the master seed and the iteration counter: resuming a run at
//! iteration `i` regenerates exactly the streams an uninterrupted run
//! would have used from `i` onward.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The role a derived stream plays within one loop iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    /// Model parameter initialization.
    ModelInit,
    /// Baseline (uniform-weight) training.
    Baseline,
    /// Weighted retraining within an iteration.
    Retrain,
    /// Candidate generation (latent sampling or BO proposal).
    Candidates,
    /// Re-drawing the training subset of the initial dataset.
    Subset,
    /// Sampling the per-iteration statistics snapshot.
    Stats,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::ModelInit => 1,
            StreamRole::Baseline => 2,
            StreamRole::Retrain => 3,
            StreamRole::Candidates => 4,
            StreamRole::Subset => 5,
            StreamRole::Stats => 6,
        }
    }
}

/// splitmix64; used only to expand seed material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A ChaCha stream fully determined by `(seed, iteration, role)`.
pub fn stream(seed: u64, iteration: u64, role: StreamRole) -> ChaCha8Rng {
    let mut state = seed ^ iteration.rotate_left(17) ^ role.tag().rotate_left(41);
    // Mix in each component separately so nearby (seed, iteration) pairs
    // do not produce correlated key material.
    let mut key = [0u8; 32];
    let mut s0 = splitmix64(&mut state) ^ seed;
    let mut s1 = splitmix64(&mut state) ^ iteration;
    let mut s2 = splitmix64(&mut state) ^ role.tag();
    for chunk in key.chunks_mut(8) {
        let word = splitmix64(&mut s0) ^ splitmix64(&mut s1) ^ splitmix64(&mut s2);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
