//! Keyed random substreams.
//!
//! Every random draw in the solver and the samplers comes from a ChaCha8
//! stream selected by `(seed, domain, a, b)`, so the numbers consumed by a
//! given candidate or chunk never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Init = 1,
    Generation = 2,
    Trial = 3,
    Seeding = 4,
    MonteCarlo = 5,
    Oracle = 6,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
    let key = splitmix(seed ^ splitmix(domain as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(splitmix(a.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ splitmix(b)));
    rng
}
