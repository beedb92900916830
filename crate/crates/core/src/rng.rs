//! Named random streams derived from a single master seed.
//!
//! Every source of randomness in a run draws from its own stream so that
//! changing one knob (say, the jitter bound) does not perturb unrelated draws
//! (say, node placement). A stream is identified by a name and an index; its
//! seed is
//!
//! ```text
//! stream_seed(master, name, index) = mix(mix(master ^ fnv1a64(name)) ^ index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. The stream itself is ChaCha8
//! seeded from that 64-bit value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub const TOPOLOGY: &str = "topology";
pub const PR_ACTIVITY: &str = "pr";
pub const CA_ASSIGNMENT: &str = "ca";
pub const DECISION: &str = "decision";
pub const JITTER: &str = "jitter";
pub const COMPETITOR: &str = "competitor";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(master: u64, name: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a64(name.as_bytes())) ^ index)
}

pub fn stream(master: u64, name: &str, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(stream_seed(master, name, index))
}
