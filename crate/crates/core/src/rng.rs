//! Deterministic per-trial random substreams.
//!
//! Every Monte Carlo trial owns an independent ChaCha8 stream. The key is
//! expanded from the master seed and the 64-bit stream id packs the
//! `(bin, trial)` counter, so the random numbers a trial sees depend only on
//! its coordinates and never on which worker ran it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random-stream handle threaded through every sampling function.
pub type RandomStream = ChaCha8Rng;

const TRIAL_BITS: u32 = 40;

/// Largest trial index addressable within one bin.
pub const MAX_TRIALS_PER_BIN: u64 = 1 << TRIAL_BITS;

/// Stream for trial `trial` of bin `bin` under `master_seed`.
///
/// # Panics
///
/// Panics if `trial >= MAX_TRIALS_PER_BIN` or `bin >= 2^24`.
pub fn substream(master_seed: u64, bin: u32, trial: u64) -> RandomStream {
    assert!(trial < MAX_TRIALS_PER_BIN, "trial index {trial} out of range");
    assert!(bin < (1 << (64 - TRIAL_BITS)), "bin index {bin} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((u64::from(bin) << TRIAL_BITS) | trial);
    rng
}
