//! Seeded random streams.
//!
//! Every randomized routine takes an explicit `u64` seed and draws from
//! `Xoshiro256PlusPlus`, so runs are reproducible across platforms. Gaussian
//! draws use the ziggurat sampler of `rand_distr::StandardNormal`.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Stream = Xoshiro256PlusPlus;

pub fn stream(seed: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Independent sub-stream `index` of `seed`, used for multi-start fan-out.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut s = stream(seed);
    for _ in 0..index {
        s.jump();
    }
    s
}

pub fn uniform_vec(rng: &mut Stream, dim: usize, lo: f64, hi: f64) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| rng.random_range(lo..hi))
}

pub fn gaussian_vec(rng: &mut Stream, dim: usize) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut Stream, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal))
}
