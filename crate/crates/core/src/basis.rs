use crate::copula::{CheckerboardCopula, INTERNAL_TOLERANCE};
use crate::error::{Error, Result};

/// Negative entries above this are rounding noise and snap to zero.
const SNAP: f64 = 1e-15;

/// Coefficients of P − U in the basis of elementary window transfers.
///
/// With zero-based indices, `c[i][j]` equals the mass of P − U in the block
/// of rows `0..=i` and columns `0..=j`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BasisCoordinates {
    n: usize,
    c: Vec<f64>,
}

impl BasisCoordinates {
    /// `c` holds (n−1)² values, row-major.
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        let m = (n - 1) * (n - 1);
        if c.len() != m {
            return Err(Error::ShapeMismatch {
                expected: m,
                actual: c.len(),
            });
        }
        Ok(Self { n, c })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; (n.max(2) - 1).pow(2)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * (self.n - 1) + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    /// Feasible range of coordinate (i, j) over all copulas.
    pub fn bounds(n: usize, i: usize, j: usize) -> (f64, f64) {
        let nf = n as f64;
        let (r, s) = ((i + 1) as f64, (j + 1) as f64);
        let lo = ((r + s - nf) / nf).max(0.0) - r * s / (nf * nf);
        let hi = r.min(s) / nf - r * s / (nf * nf);
        (lo, hi)
    }
}

/// Coordinates of P, i.e. (A†⊗A†)(p − 1/n²).
pub fn to_coordinates(p: &CheckerboardCopula) -> BasisCoordinates {
    let n = p.n();
    let u = 1.0 / (n * n) as f64;
    let m = n - 1;
    let mut c = vec![0.0; m * m];
    let mut col = vec![0.0; m];
    for i in 0..m {
        let mut run = 0.0;
        for j in 0..m {
            run += p.get(i, j) - u;
            col[j] += run;
            c[i * m + j] = col[j];
        }
    }
    BasisCoordinates { n, c }
}

/// Rebuilds P = U + Σ c_ij T^{ij}.
pub fn to_copula(coords: &BasisCoordinates) -> Result<CheckerboardCopula> {
    let n = coords.n;
    let m = n - 1;
    let u = 1.0 / (n * n) as f64;
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i as usize >= m || j as usize >= m {
            0.0
        } else {
            coords.c[i as usize * m + j as usize]
        }
    };
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (i as isize, j as isize);
            let mut x = u + at(a, b) - at(a - 1, b) - at(a, b - 1) + at(a - 1, b - 1);
            if x < 0.0 {
                if x > -SNAP {
                    x = 0.0;
                } else {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: x,
                    });
                }
            }
            p[i * n + j] = x;
        }
    }
    CheckerboardCopula::with_tolerance(n, p, INTERNAL_TOLERANCE)
}

/// Moves `eps` of mass from the anti-diagonal to the diagonal of the
/// window with top-left cell (i, j), i.e. returns P + eps·T^{ij}.
pub fn mass_transfer(p: &CheckerboardCopula, i: usize, j: usize, eps: f64) -> Result<CheckerboardCopula> {
    let n = p.n();
    if i + 1 >= n || j + 1 >= n {
        return Err(Error::WindowOutOfRange { row: i, col: j, n });
    }
    let mut q = p.as_slice().to_vec();
    for (r, c, s) in [(i, j, 1.0), (i + 1, j + 1, 1.0), (i, j + 1, -1.0), (i + 1, j, -1.0)] {
        let x = q[r * n + c] + s * eps;
        if x < 0.0 {
            return Err(Error::NegativeEntry {
                row: r,
                col: c,
                value: x,
            });
        }
        q[r * n + c] = x;
    }
    Ok(CheckerboardCopula::from_raw(n, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{kendall_tau, spearman_rho};

    #[test]
    fn uniform_is_origin() {
        let c = to_coordinates(&CheckerboardCopula::uniform(6).unwrap());
        assert!(c.as_slice().iter().all(|x| x.abs() < 1e-16));
        let u = to_copula(&BasisCoordinates::zeros(6).unwrap()).unwrap();
        assert_eq!(u, CheckerboardCopula::uniform(6).unwrap());
    }

    #[test]
    fn comonotone_coordinates() {
        for n in 2..=9 {
            let nf = n as f64;
            let c = to_coordinates(&CheckerboardCopula::comonotone(n).unwrap());
            for i in 1..n {
                for j in 1..n {
                    let expected = i.min(j) as f64 * (nf - i.max(j) as f64) / (nf * nf);
                    assert!((c.get(i - 1, j - 1) - expected).abs() < 1e-15);
                }
            }
            let (_, hi) = BasisCoordinates::bounds(n, 0, 0);
            assert!((c.get(0, 0) - hi).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_reported_with_index() {
        let mut v = vec![0.0; 4];
        v[3] = 0.5;
        let err = to_copula(&BasisCoordinates::new(3, v).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { row: 1, col: 2, .. }));
    }

    #[test]
    fn symmetric_three_by_three() {
        // τ = 2c11c22 − 2c12² + (8/9)(c11 + c22 + 2c12) on symmetric coordinates
        for (c11, c12, c22) in [(0.02, 0.01, 0.03), (-0.05, 0.02, 0.04), (0.1, 0.05, 0.1)] {
            let coords = BasisCoordinates::new(3, vec![c11, c12, c12, c22]).unwrap();
            let p = to_copula(&coords).unwrap();
            let expected = 2.0 * c11 * c22 - 2.0 * c12 * c12 + 8.0 / 9.0 * (c11 + c22 + 2.0 * c12);
            assert!((kendall_tau(&p) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn transfer_moves_rho_linearly() {
        let p = CheckerboardCopula::uniform(5).unwrap();
        let eps = 0.01;
        let q = mass_transfer(&p, 1, 2, eps).unwrap();
        assert!((spearman_rho(&q) - 12.0 * eps / 25.0).abs() < 1e-15);
        assert!(q.margin_error() < 1e-15);
        assert_eq!(mass_transfer(&p, 0, 0, 0.0).unwrap(), p);
        assert!(mass_transfer(&p, 4, 0, 0.0).is_err());
        assert!(matches!(
            mass_transfer(&p, 0, 0, 0.05),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
    }
}
