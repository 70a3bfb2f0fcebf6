use nalgebra::DMatrix;
use serde::Serialize;

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};
use crate::structure::StructuralMatrices;

/// Largest grid accepted by [`hessian_definiteness`].
pub const HESSIAN_MAX_N: usize = 30;

#[derive(Debug, Clone, Serialize)]
pub struct DefinitenessReport {
    pub lambda_used: f64,
    /// smallest eigenvalue of D₁ + λD₂
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
    /// extremes of vᵀD₂v / vᵀD₁v
    pub quotient_min: f64,
    pub quotient_max: f64,
    /// max over block rows of Σ_{j≠i} ‖B_ij‖_F, which bounds |vᵀD₂v / vᵀD₁v|
    pub gershgorin_bound: f64,
}

impl DefinitenessReport {
    pub fn quotient_bound(&self) -> f64 {
        self.quotient_min.abs().max(self.quotient_max.abs())
    }
}

/// Definiteness of the information Hessian D₁ + λD₂ in basis coordinates,
/// where D₁ = (A⊗A)ᵀ Diag(1/p) (A⊗A) and D₂ = −M⊗M.
pub fn hessian_definiteness(p: &CheckerboardCopula, lambda: f64) -> Result<DefinitenessReport> {
    let n = p.n();
    if n > HESSIAN_MAX_N {
        return Err(Error::Unsupported(format!(
            "definiteness check is limited to n <= {HESSIAN_MAX_N}, got {n}"
        )));
    }
    if let Some((row, col)) = p.first_zero() {
        return Err(Error::ZeroEntry { row, col });
    }
    let s = StructuralMatrices::new(n)?;
    let d1 = d1(p);
    let d2 = -s.m.kronecker(&s.m);

    let min_eigenvalue = (&d1 + &d2 * lambda).symmetric_eigenvalues().min();
    let l = d1
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Unsupported("D1 is not positive definite".into()))?
        .l();
    let li = l
        .try_inverse()
        .ok_or_else(|| Error::Unsupported("singular Cholesky factor".into()))?;
    let c = &li * &d2 * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let q = c.symmetric_eigenvalues();

    Ok(DefinitenessReport {
        lambda_used: lambda,
        min_eigenvalue,
        positive_definite: min_eigenvalue > 0.0,
        quotient_min: q.min(),
        quotient_max: q.max(),
        gershgorin_bound: gershgorin(p, &s.x),
    })
}

fn d1(p: &CheckerboardCopula) -> DMatrix<f64> {
    let n = p.n();
    let m = n - 1;
    let mut d = DMatrix::zeros(m * m, m * m);
    // windows touching each cell, with the sign of the cell in T^{ij}
    for ci in 0..n {
        for cj in 0..n {
            let mut touching = Vec::with_capacity(4);
            for (di, dj, sign) in [(0, 0, 1.0), (1, 1, 1.0), (0, 1, -1.0), (1, 0, -1.0)] {
                if ci >= di && cj >= dj && ci - di < m && cj - dj < m {
                    touching.push(((ci - di) * m + (cj - dj), sign));
                }
            }
            let w = 1.0 / p.get(ci, cj);
            for &(a, sa) in &touching {
                for &(b, sb) in &touching {
                    d[(a, b)] += sa * sb * w;
                }
            }
        }
    }
    d
}

fn gershgorin(p: &CheckerboardCopula, x: &DMatrix<f64>) -> f64 {
    let n = p.n();
    // inner[i][j] = Σ_kl p_ik X_kl² p_jl
    let x2 = x.map(|v| v * v);
    let pm = DMatrix::from_row_slice(n, n, p.as_slice());
    let inner = &pm * x2 * pm.transpose();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| x[(i, j)].abs() * inner[(i, j)].max(0.0).sqrt())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_matches_definition() {
        let n = 4;
        let p = CheckerboardCopula::sinkhorn(n, &(1..=16).map(|k| k as f64).collect::<Vec<_>>(), 1000, 1e-15).unwrap();
        let s = StructuralMatrices::new(n).unwrap();
        let aa = s.a.kronecker(&s.a);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n * n,
            p.as_slice().iter().map(|x| 1.0 / x),
        ));
        let dense = aa.transpose() * diag * &aa;
        assert!((dense - d1(&p)).abs().max() < 1e-9);
    }

    #[test]
    fn d2_is_minus_m_kron_m() {
        for n in 2..=6 {
            let s = StructuralMatrices::new(n).unwrap();
            let aa = s.a.kronecker(&s.a);
            let d2 = aa.transpose() * s.w.as_ref().unwrap() * &aa;
            assert!((d2 + s.m.kronecker(&s.m)).abs().max() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn uniform_is_definite() {
        let u = CheckerboardCopula::uniform(5).unwrap();
        let r = hessian_definiteness(&u, 0.0).unwrap();
        assert!(r.positive_definite);
        assert!(r.quotient_bound() <= 0.5 + 1e-9);
        assert!(r.gershgorin_bound >= r.quotient_bound() - 1e-12);
        assert!(hessian_definiteness(&u, 1.99).unwrap().positive_definite);
    }
}
