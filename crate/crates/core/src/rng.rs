//! Counter-keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! 256-bit key is the tuple `(seed, domain, a, b)`, little-endian. A stream
//! is therefore a pure function of its key: the heights of a site-indexed
//! field do not depend on the volume they are sampled in, and walk `k` of an
//! experiment never shares state with walk `k + 1`. ChaCha8 output is
//! specified bit-for-bit, so results reproduce across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::Site;

/// Separates the uses of a single master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Iid = 1,
    Omega = 2,
    OmegaPrime = 3,
    Umrc = 4,
    Overlay = 5,
    Walk = 6,
    Clock = 7,
    Order = 8,
    Derive = 9,
    Probe = 10,
}

pub fn stream(seed: u64, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream keyed by a lattice site. Coordinates are packed so that distinct
/// sites of dimension at most 3 (with |coord| < 2^31) get distinct keys.
pub fn site_stream(seed: u64, domain: Domain, site: &Site) -> ChaCha8Rng {
    let c = site.coords();
    let a = c.first().copied().unwrap_or(0) as u64;
    let hi = c.get(1).copied().unwrap_or(0) as i32 as u32 as u64;
    let lo = c.get(2).copied().unwrap_or(0) as i32 as u32 as u64;
    stream(seed, domain, a, (hi << 32) | lo)
}

/// Child seed for an independent sub-experiment.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, Domain::Derive, index, 0).next_u64()
}
