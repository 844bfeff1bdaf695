//! Deterministic random streams.
//!
//! Every stochastic quantity is drawn from a [`ChaCha8Rng`] whose seed is a
//! pure function of the master seed and a path of indices (realization,
//! slab, probe block, ...). Results therefore do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream domains, so that e.g. slab 3 and probe block 3 never share a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Realization = 1,
    Slab = 2,
    Probes = 3,
    Counts = 4,
    Bootstrap = 5,
    Photons = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `(parent, domain, index)`.
pub fn derive_seed(parent: u64, domain: Domain, index: u64) -> u64 {
    let a = splitmix64(parent ^ (domain as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    splitmix64(a ^ splitmix64(index))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_stream(parent: u64, domain: Domain, index: u64) -> Stream {
    stream(derive_seed(parent, domain, index))
}
