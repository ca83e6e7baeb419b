//! Seed splitting for reproducible, order-independent Monte Carlo.
//!
//! Every trial gets its own ChaCha stream keyed by `(seed, lane, trial)`:
//! the master seed selects the key, and the 64-bit stream id is
//! `lane << TRIAL_BITS | trial`. Streams of a ChaCha keyed generator are
//! statistically independent, so results do not depend on how trials are
//! batched across worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bits of the stream id reserved for the trial index.
const TRIAL_BITS: u32 = 40;

/// Maximum number of trials addressable per lane.
pub const MAX_TRIALS: u64 = 1 << TRIAL_BITS;

/// Generator for one `(seed, lane, trial)` cell.
///
/// Lanes separate independent uses of randomness inside one experiment
/// (e.g. profile draw vs. selection-rule draws) so that paired designs can
/// reuse the same profile stream across arms.
pub fn stream(seed: u64, lane: u64, trial: u64) -> ChaCha8Rng {
    assert!(trial < MAX_TRIALS, "trial index exceeds stream space");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((lane << TRIAL_BITS) | trial);
    rng
}
