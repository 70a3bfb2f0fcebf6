use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};
use crate::structure::apply_w;

/// Least-squares multipliers of log p_ij + 1 + λ(Wp)_ij − α_j − β_i = 0.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityFit {
    /// `None` when the λ column is collinear with the margin columns.
    pub lambda: Option<f64>,
    /// column multipliers, normalized to sum to zero
    pub alpha: Vec<f64>,
    /// row multipliers
    pub beta: Vec<f64>,
    /// root mean square of the residual over all n² cells
    pub residual_norm: f64,
}

pub fn stationarity_fit(p: &CheckerboardCopula) -> Result<StationarityFit> {
    if let Some((row, col)) = p.first_zero() {
        return Err(Error::ZeroEntry { row, col });
    }
    let n = p.n();
    let wp = apply_w(p.as_slice(), n);
    // unknowns: λ, α_0..α_{n−2}, β_0..β_{n−1}; α_{n−1} = −Σ α_k
    let cols = 2 * n;
    let mut x = DMatrix::zeros(n * n, cols);
    let mut y = DVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let r = i * n + j;
            x[(r, 0)] = wp[r];
            if j + 1 < n {
                x[(r, 1 + j)] = -1.0;
            } else {
                for k in 0..n - 1 {
                    x[(r, 1 + k)] = 1.0;
                }
            }
            x[(r, n + i)] = -1.0;
            y[r] = -(p.get(i, j).ln() + 1.0);
        }
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let identifiable = smin > 1e-10 * smax;
    let theta = svd
        .solve(&y, 1e-12 * smax)
        .map_err(|e| Error::Unsupported(format!("least squares failed: {e}")))?;
    let residual = &x * &theta - &y;
    let mut alpha: Vec<f64> = (0..n - 1).map(|k| theta[1 + k]).collect();
    alpha.push(-alpha.iter().sum::<f64>());
    Ok(StationarityFit {
        lambda: identifiable.then_some(theta[0]),
        alpha,
        beta: (0..n).map(|i| theta[n + i]).collect(),
        residual_norm: residual.norm() / n as f64,
    })
}
