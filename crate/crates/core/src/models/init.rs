use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Matrix;

pub fn model_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `√(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// `rows × cols` matrix drawn uniformly from `±glorot_limit(rows, cols)`.
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let a = glorot_limit(rows, cols);
    let dist = Uniform::new_inclusive(-a, a);
    Matrix::from_fn(rows, cols, |_, _| dist.sample(rng))
}

/// `I_n` plus independent `U(−0.01, 0.01)` noise on every entry.
pub(crate) fn near_identity(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let dist = Uniform::new_inclusive(-0.01, 0.01);
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + dist.sample(rng))
}
