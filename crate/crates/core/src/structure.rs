use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest grid for which the n²×n² matrix W is stored densely.
pub const DENSE_W_LIMIT: usize = 32;

/// The fixed matrices attached to an n×n grid.
///
/// `w` is only materialized for n ≤ 32; use [`apply_w`] otherwise.
#[derive(Debug, Clone)]
pub struct StructuralMatrices {
    pub n: usize,
    pub xi: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub w: Option<DMatrix<f64>>,
    pub a: DMatrix<f64>,
    pub a_dagger: DMatrix<f64>,
    /// (n−1)×(n−1): +1 on the subdiagonal, −1 on the superdiagonal.
    pub m: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

impl StructuralMatrices {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        let xi = xi(n);
        let v = &xi - DMatrix::from_element(n, n, 1.0);
        let w = (n <= DENSE_W_LIMIT).then(|| dense_w(&xi));
        let a_dagger = a_dagger(n);
        let m = m_matrix(n - 1);
        let x = a_dagger.transpose() * &m * &a_dagger;
        Ok(Self {
            n,
            omega: omega(n),
            v,
            w,
            a: a_matrix(n),
            a_dagger,
            m,
            x,
            xi,
        })
    }
}

fn xi(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, xi_entry)
}

#[inline]
pub(crate) fn xi_entry(i: usize, j: usize) -> f64 {
    match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => 2.0,
        std::cmp::Ordering::Less => 0.0,
    }
}

fn omega(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |i, j| omega_entry(nf, i, j))
}

/// ω for zero-based indices.
#[inline]
pub(crate) fn omega_entry(nf: f64, i: usize, j: usize) -> f64 {
    (nf - i as f64 - 0.5) * (nf - j as f64 - 0.5) / (nf * nf)
}

/// W = ½(Ξ⊗Ξᵀ + Ξᵀ⊗Ξ) under row-major vectorization.
fn dense_w(xi: &DMatrix<f64>) -> DMatrix<f64> {
    let xt = xi.transpose();
    (xi.kronecker(&xt) + xt.kronecker(xi)) * 0.5
}

/// n×(n−1), with 1 at (k, k) and −1 at (k+1, k).
fn a_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n - 1, |i, k| {
        if i == k {
            1.0
        } else if i == k + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Left inverse of A satisfying A†A = E and AA† = E − J/n.
fn a_dagger(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n - 1, n, |i, j| {
        // one-based row r = i + 1
        let r = (i + 1) as f64;
        if j <= i {
            (nf - r) / nf
        } else {
            -r / nf
        }
    })
}

fn m_matrix(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i == j + 1 {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Wp for a row-major n×n matrix, as ½ vec(ΞPΞ + ΞᵀPΞᵀ), in O(n²).
pub fn apply_w(p: &[f64], n: usize) -> Vec<f64> {
    let a = xi_right(&xi_left(p, n, false), n, false);
    let b = xi_right(&xi_left(p, n, true), n, true);
    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// ΞM (or ΞᵀM when `transposed`) for row-major M.
pub(crate) fn xi_left(m: &[f64], n: usize, transposed: bool) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let mut acc = 0.0;
        let rows: Box<dyn Iterator<Item = usize>> = if transposed {
            Box::new((0..n).rev())
        } else {
            Box::new(0..n)
        };
        for i in rows {
            let x = m[i * n + j];
            out[i * n + j] = x + 2.0 * acc;
            acc += x;
        }
    }
    out
}

/// MΞ (or MΞᵀ when `transposed`) for row-major M.
pub(crate) fn xi_right(m: &[f64], n: usize, transposed: bool) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let mut acc = 0.0;
        let cols: Box<dyn Iterator<Item = usize>> = if transposed {
            Box::new(0..n)
        } else {
            Box::new((0..n).rev())
        };
        for j in cols {
            let x = m[i * n + j];
            out[i * n + j] = x + 2.0 * acc;
            acc += x;
        }
    }
    out
}
