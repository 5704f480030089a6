//! Counter-based keyed randomness.
//!
//! Every random quantity in the crate is either a pure function of a key
//! (environment values, percolation clocks) or drawn from a sequential
//! stream whose seed is itself derived from a key. Keys are short tuples of
//! 64-bit words absorbed through the SplitMix64 finalizer, so results never
//! depend on evaluation order or on how replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Domain separation for derived keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamKind {
    RecoveryRate = 1,
    EdgeWeight = 2,
    Env = 3,
    Run = 4,
    RecoveryClock = 5,
    EdgeClock = 6,
    Graph = 7,
}

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix64(state ^ mix64(word.wrapping_add(GOLDEN)))
}

/// Hashes `(seed, kind, a, b)` to a well-mixed 64-bit word.
#[inline]
pub fn keyed(seed: u64, kind: StreamKind, a: u64, b: u64) -> u64 {
    let s = absorb(mix64(seed), kind as u64);
    absorb(absorb(s, a), b)
}

/// Maps a 64-bit word to the open interval (0, 1) on a 2^-52 grid.
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform in (0, 1) as a pure function of the key.
#[inline]
pub fn keyed_unit(seed: u64, kind: StreamKind, a: u64, b: u64) -> f64 {
    to_open_unit(keyed(seed, kind, a, b))
}

/// Seed for a child stream, e.g. `(master, Run, grid_index, replication)`.
pub fn derive_seed(master: u64, kind: StreamKind, a: u64, b: u64) -> u64 {
    keyed(master, kind, a, b)
}

/// Sequential generator used inside a single run.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in (0, 1) drawn from a sequential stream.
#[inline]
pub fn open_unit<R: rand::RngCore + ?Sized>(rng: &mut R) -> f64 {
    to_open_unit(rng.next_u64())
}

/// Exponential variate with the given rate. `rate` must be positive.
#[inline]
pub fn exponential<R: rand::RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}
