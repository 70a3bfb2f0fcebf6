use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PseudoObservations;
use crate::copula::CheckerboardCopula;

/// Draws `count` points from the checkerboard density of `p`.
///
/// The generator is ChaCha8 seeded through `seed_from_u64(seed)`. Each
/// point consumes three draws: a `[0, 1)` value locating the cell on the
/// row-major cumulative distribution of the entries, then two open-interval
/// values placing the point uniformly inside that cell.
pub fn sample(p: &CheckerboardCopula, count: usize, seed: u64) -> PseudoObservations {
    let n = p.n();
    let mut cdf = Vec::with_capacity(n * n);
    let mut acc = 0.0;
    for &x in p.as_slice() {
        acc += x;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    let nf = n as f64;
    for _ in 0..count {
        let t = rng.gen::<f64>() * total;
        // first cell whose cumulative mass exceeds t; empty cells never match
        let cell = cdf.partition_point(|&c| c <= t).min(n * n - 1);
        let (i, j) = (cell / n, cell % n);
        let a: f64 = rng.sample(Open01);
        let b: f64 = rng.sample(Open01);
        u.push((i as f64 + a) / nf);
        v.push((j as f64 + b) / nf);
    }
    PseudoObservations::from_points(u, v).expect("points lie inside the unit square")
}
