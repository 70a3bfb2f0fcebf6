#![allow(dead_code)]

use mick::CheckerboardCopula;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sinkhorn scaling of a positive weight matrix.
pub fn scaled(n: usize, weights: &[f64]) -> CheckerboardCopula {
    CheckerboardCopula::sinkhorn(n, weights, 100_000, 1e-15).expect("positive weights scale")
}

pub fn random_copula(n: usize, seed: u64) -> CheckerboardCopula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.02..1.0)).collect();
    scaled(n, &w)
}

/// Strictly positive copulas with n in `sizes`.
pub fn copula_strategy(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CheckerboardCopula> {
    sizes.prop_flat_map(|n| {
        proptest::collection::vec(0.02f64..1.0, n * n).prop_map(move |w| scaled(n, &w))
    })
}

pub fn xi(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if i > j { 2.0 } else { 0.0 })
}

pub fn as_matrix(p: &CheckerboardCopula) -> DMatrix<f64> {
    DMatrix::from_row_slice(p.n(), p.n(), p.as_slice())
}
