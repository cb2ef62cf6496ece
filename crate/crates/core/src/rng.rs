//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), which produces the
//! same sequence on every platform. A user seed selects the key; the 64-bit
//! stream id is split into a domain tag (high byte) and an index, so every
//! module and every replicate or cell reads from its own stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    Replication = 1,
    Synthetic = 2,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    assert!(index < 1 << 56, "stream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
