//! Seeded Gaussian streams.
//!
//! Every random draw in the crate comes from ChaCha8 seeded with
//! `seed_from_u64(seed)` and then switched to an explicit stream number, so
//! independent consumers (replications, panel columns) never share a stream
//! and results do not depend on evaluation order or thread count. Normals are
//! drawn with `rand_distr::StandardNormal` (ziggurat).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::num::Real;

pub type Prng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn normals<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<T> {
    (0..len).map(|_| normal(rng)).collect()
}
