//! Seed derivation for independent, order-free random streams.
//!
//! Every trial gets its own ChaCha stream whose seed is a hash of the master
//! seed and the trial's coordinates, so results never depend on which worker
//! runs a trial or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a path of stream coordinates.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed shared by every policy and uncertainty setting for one approach task.
pub fn task_seed(master: u64, set_id: u32, target_id: usize) -> u64 {
    derive_seed(master, &[0x7365_7473, set_id as u64, target_id as u64])
}

pub fn stream(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
