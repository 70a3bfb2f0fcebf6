use serde::Serialize;

use crate::basis::BasisCoordinates;
use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};

const SLACK: f64 = 1e-15;

/// Minimal-information grid point found by [`brute_force_band`].
#[derive(Debug, Clone, Serialize)]
pub struct BruteForceResult {
    #[serde(skip)]
    pub copula: CheckerboardCopula,
    pub tau: f64,
    pub information: f64,
    /// grid points whose tau fell in the band
    pub candidates: usize,
}

/// Exhaustive grid search for the minimal-information copula with
/// tau ≈ `mu`, on n ∈ {2, 3}.
///
/// The band is ±1/(resolution−1) for n = 2 and ±0.02/resolution for n = 3.
pub fn brute_force_mick(n: usize, mu: f64, resolution: usize) -> Result<CheckerboardCopula> {
    let half = if n == 2 {
        1.0 / (resolution.max(2) - 1) as f64
    } else {
        0.02 / resolution as f64
    };
    brute_force_band(n, mu - half, mu + half, resolution).map(|r| r.copula)
}

/// Searches a uniform grid with `resolution` points per coordinate axis,
/// spanning each coordinate's feasible range, for the point of least
/// information whose tau lies in [lo, hi].
pub fn brute_force_band(n: usize, lo: f64, hi: f64, resolution: usize) -> Result<BruteForceResult> {
    if !(n == 2 || n == 3) {
        return Err(Error::Unsupported(format!("brute force needs n in {{2, 3}}, got {n}")));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    let axes: Vec<Vec<f64>> = (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (a, b) = BasisCoordinates::bounds(n, i, j);
            (0..resolution)
                .map(|k| a + (b - a) * k as f64 / (resolution - 1) as f64)
                .collect()
        })
        .collect();
    let mut best: Option<([f64; 9], f64, f64)> = None;
    let mut candidates = 0;
    let mut consider = |p: [f64; 9], tau: f64| {
        candidates += 1;
        let info = info(&p[..n * n]);
        if best.is_none_or(|(_, _, b)| info < b) {
            best = Some((p, tau, info));
        }
    };

    if n == 2 {
        for &c in &axes[0] {
            if let Some(p) = snapped(cells2(c)) {
                let tau = tau_dense(&p[..4], 2);
                if tau >= lo && tau <= hi {
                    let mut q = [0.0; 9];
                    q[..4].copy_from_slice(&p);
                    consider(q, tau);
                }
            }
        }
    } else {
        let u = 1.0 / 9.0;
        let g22 = &axes[3];
        let step = g22[1] - g22[0];
        for &c11 in &axes[0] {
            if u + c11 < -SLACK {
                continue;
            }
            for &c12 in &axes[1] {
                if u + c12 - c11 < -SLACK || u - c12 < -SLACK {
                    continue;
                }
                for &c21 in &axes[2] {
                    if u + c21 - c11 < -SLACK || u - c21 < -SLACK {
                        continue;
                    }
                    // entries depending on c22 stay nonnegative on [from, to]
                    let from = (c12 + c21 - c11 - u).max(-u);
                    let to = (u + c12).min(u + c21);
                    if from > to {
                        continue;
                    }
                    let k0 = ((from - g22[0]) / step - 1e-6).ceil().max(0.0) as usize;
                    let k1 = (((to - g22[0]) / step + 1e-6).floor() as isize).min(resolution as isize - 1);
                    if k1 < k0 as isize {
                        continue;
                    }
                    // tau is quadratic in c22; interpolate it through three nodes
                    let t = |c22: f64| tau_dense(&cells3(c11, c12, c21, c22), 3);
                    let (x0, x1, x2) = (g22[0], g22[resolution / 2], g22[resolution - 1]);
                    let (y0, y1, y2) = (t(x0), t(x1), t(x2));
                    let quad = |x: f64| {
                        y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
                            + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
                            + y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
                    };
                    for &c22 in &g22[k0..=k1 as usize] {
                        let approx = quad(c22);
                        if approx < lo - 1e-9 || approx > hi + 1e-9 {
                            continue;
                        }
                        let Some(p) = snapped(cells3(c11, c12, c21, c22)) else {
                            continue;
                        };
                        let tau = tau_dense(&p, 3);
                        if tau >= lo && tau <= hi {
                            consider(p, tau);
                        }
                    }
                }
            }
        }
    }

    let (p, tau, information) = best.ok_or(Error::EmptyBand { lo, hi })?;
    let copula = CheckerboardCopula::new(n, p[..n * n].to_vec())?;
    Ok(BruteForceResult {
        copula,
        tau,
        information,
        candidates,
    })
}

/// Rounding noise below zero snaps to zero; anything more is infeasible.
fn snapped<const K: usize>(mut p: [f64; K]) -> Option<[f64; K]> {
    for x in p.iter_mut() {
        if *x < -SLACK {
            return None;
        }
        *x = x.max(0.0);
    }
    Some(p)
}

fn cells2(c: f64) -> [f64; 4] {
    let u = 0.25;
    [u + c, u - c, u - c, u + c]
}

fn cells3(c11: f64, c12: f64, c21: f64, c22: f64) -> [f64; 9] {
    let u = 1.0 / 9.0;
    [
        u + c11,
        u + c12 - c11,
        u - c12,
        u + c21 - c11,
        u + c22 - c12 - c21 + c11,
        u - c22 + c12,
        u - c21,
        u - c22 + c21,
        u + c22,
    ]
}

/// 1 − Σ_{ijkl} ξ_ik p_kl ξ_lj p_ij, summed directly.
fn tau_dense(p: &[f64], n: usize) -> f64 {
    let xi = |a: usize, b: usize| -> f64 {
        if a == b {
            1.0
        } else if a > b {
            2.0
        } else {
            0.0
        }
    };
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += xi(i, k) * p[k * n + l] * xi(l, j) * p[i * n + j];
                }
            }
        }
    }
    1.0 - s
}

fn info(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{information, kendall_tau};

    #[test]
    fn two_by_two_closed_form() {
        // tau = 2c on the single coordinate
        let mu = 0.3;
        let r = brute_force_band(2, mu, mu + 0.01, 1001).unwrap();
        let c: f64 = 0.15;
        let exact = 2.0 * (0.25 + c) * (0.25 + c).ln() + 2.0 * (0.25 - c) * (0.25 - c).ln();
        assert!((r.tau - mu).abs() < 1e-12);
        assert!((r.information - exact).abs() < 1e-12);
    }

    #[test]
    fn three_by_three_zero() {
        let p = brute_force_mick(3, 0.0, 61).unwrap();
        assert!(p.max_abs_diff(&CheckerboardCopula::uniform(3).unwrap()) < 1e-12);
    }

    #[test]
    fn pruned_search_matches_naive() {
        let res = 13;
        let (lo, hi) = (0.18, 0.22);
        let fast = brute_force_band(3, lo, hi, res).unwrap();
        let axes: Vec<Vec<f64>> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(i, j)| {
                let (a, b) = BasisCoordinates::bounds(3, i, j);
                (0..res).map(|k| a + (b - a) * k as f64 / (res - 1) as f64).collect()
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut count = 0;
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    for &d in &axes[3] {
                        let coords = BasisCoordinates::new(3, vec![a, b, c, d]).unwrap();
                        if let Ok(p) = crate::basis::to_copula(&coords) {
                            if p.min_entry() < 0.0 {
                                continue;
                            }
                            let t = kendall_tau(&p);
                            if t >= lo && t <= hi {
                                count += 1;
                                best = best.min(information(&p));
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(fast.candidates, count);
        assert!((fast.information - best).abs() < 1e-14);
    }

    #[test]
    fn rejects_large_grids() {
        assert!(brute_force_mick(4, 0.1, 10).is_err());
    }
}
