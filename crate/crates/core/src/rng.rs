//! Deterministic random streams for trials.
//!
//! Every trial owns two ChaCha8 streams derived from the global seed: the
//! environment stream (stream id `2 * trial`) and the strategy stream
//! (stream id `2 * trial + 1`). The environment consumes exactly one 64-bit
//! word per step, so step `t` (1-based) always reads the word at word
//! position `2 * (t - 1)`. Trials are therefore independent of scheduling,
//! and strategy randomness never shifts the environment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StrategyRng = ChaCha8Rng;

fn keyed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Environment stream for `trial` under `seed`.
pub fn environment_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    keyed(seed, trial.wrapping_mul(2))
}

/// Strategy-owned stream for `trial` under `seed`.
pub fn strategy_stream(seed: u64, trial: u64) -> StrategyRng {
    keyed(seed, trial.wrapping_mul(2).wrapping_add(1))
}

/// Maps a uniform 64-bit word onto `0..n` by the multiply-high reduction.
#[inline]
pub fn uniform_index(word: u64, n: usize) -> usize {
    ((word as u128 * n as u128) >> 64) as usize
}

/// Maps a uniform 64-bit word onto `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// SplitMix64 step; used to expand a single environment word when a sample
/// needs more than one draw.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
