//! Stable seed derivation.
//!
//! Every random stream in a run is seeded from one master seed through
//! [`derive`], so adding or removing a consumer never shifts the draws seen
//! by another one. The mixer is SplitMix64's finalizer, which is fixed and
//! will not change between releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Purpose tags that keep substreams apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Topology = 1,
    Forwarding = 2,
    Generation = 3,
    FreeRiders = 4,
    Origin = 5,
    SweepRun = 6,
    Attempt = 7,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of substream `(stream, index)` from `master`.
pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    mix(mix(mix(master) ^ (stream as u64).wrapping_mul(GOLDEN)) ^ index)
}

pub fn rng_for(master: u64, stream: Stream, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive(master, stream, index))
}
