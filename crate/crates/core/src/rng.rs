//! Counter-keyed random streams.
//!
//! Every stream is identified by `(master seed, domain, K, N, trial)`. Two runs
//! that touch the same key see the same numbers no matter which other grid
//! points or trials are evaluated, or in which order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

/// Independent purposes a stream can serve within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Channel = 1,
    Scheduler = 2,
    Geometry = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn stream_key(master_seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(master_seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(master_seed: u64, domain: Domain, cells: usize, users: usize, trial: u64) -> SimRng {
    let key = stream_key(
        master_seed,
        &[domain as u64, cells as u64, users as u64, trial],
    );
    SimRng::seed_from_u64(key)
}
