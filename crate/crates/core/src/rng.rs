//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator whose 64-bit seed is derived from the
//! experiment seed by chaining the SplitMix64 finalizer over
//! `(seed, domain, trial, agent)`. Each `(trial, agent)` pair therefore owns an
//! independent stream, and a trial's output does not depend on which other
//! trials ran, or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream domains. Distinct domains never share a stream for the same indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Per-agent reward draws.
    Rewards = 1,
    /// Selection of arm means from a means file.
    Means = 2,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the experiment seed with the stream coordinates.
pub fn derive_seed(seed: u64, domain: Domain, trial: u64, agent: u64) -> u64 {
    let mut h = splitmix64(seed);
    for word in [domain as u64, trial, agent] {
        h = splitmix64(h ^ word);
    }
    h
}

pub fn stream(seed: u64, domain: Domain, trial: u64, agent: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, trial, agent))
}
