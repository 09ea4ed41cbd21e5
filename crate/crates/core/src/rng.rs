//! Seed derivation. Every random draw in the crate comes from a ChaCha8
//! stream addressed by `(seed, replication, channel)`, so a replication's
//! draws never depend on which other replications ran or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const CHANNEL_LOAD: u64 = 0;
pub(crate) const CHANNEL_PV: u64 = 1;
pub(crate) const CHANNEL_WIND: u64 = 2;
const CHANNEL_UNIT_BASE: u64 = 16;

/// Units addressable by the outage channels.
pub const MAX_UNITS: usize = 128;

pub(crate) fn stream(seed: u64, replication: u64, channel: u64) -> ChaCha8Rng {
    debug_assert!(channel < 256 && replication < (1 << 56));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 8) | channel);
    rng
}

pub(crate) fn unit_channel(unit: usize) -> u64 {
    debug_assert!(unit < MAX_UNITS);
    CHANNEL_UNIT_BASE + unit as u64
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
