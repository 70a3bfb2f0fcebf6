use crate::copula::CheckerboardCopula;
use crate::structure::{apply_w, xi_left, xi_right};

/// Entries below this are treated as zero in `p log p`.
pub const ZERO_MASS: f64 = 1e-300;

/// Kendall's tau, 1 − tr(ΞPΞPᵀ).
pub fn kendall_tau(p: &CheckerboardCopula) -> f64 {
    let n = p.n();
    let q = xi_right(&xi_left(p.as_slice(), n, false), n, false);
    1.0 - dot(&q, p.as_slice())
}

/// Kendall's tau as 1 − pᵀWp, with W applied implicitly.
pub fn kendall_tau_quadratic(p: &CheckerboardCopula) -> f64 {
    let wp = apply_w(p.as_slice(), p.n());
    1.0 - dot(&wp, p.as_slice())
}

/// Kendall's tau as pᵀ(V⊗V)p = tr(VPVᵀPᵀ) with V = Ξ − J.
pub fn kendall_tau_vv(p: &CheckerboardCopula) -> f64 {
    let n = p.n();
    let s = p.as_slice();
    // VP = ΞP − J P, and J P has every row equal to the column sums (1/n).
    let mut vp = xi_left(s, n, false);
    let mut col = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            col[j] += s[i * n + j];
        }
    }
    for i in 0..n {
        for j in 0..n {
            vp[i * n + j] -= col[j];
        }
    }
    // (VP)Vᵀ = (VP)Ξᵀ − (VP)J
    let mut q = xi_right(&vp, n, true);
    for i in 0..n {
        let r: f64 = vp[i * n..(i + 1) * n].iter().sum();
        for j in 0..n {
            q[i * n + j] -= r;
        }
    }
    dot(&q, s)
}

/// Spearman's rho, 12(tr(ΩP) − 1/4).
pub fn spearman_rho(p: &CheckerboardCopula) -> f64 {
    // ω centred by its margin means; equal to 12(Σ ω p − 1/4) for any copula
    // but free of the cancellation against 1/4
    let n = p.n();
    let nf = n as f64;
    let centred: Vec<f64> = (0..n).map(|i| (nf - 2.0 * i as f64 - 1.0) / (2.0 * nf)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let row: f64 = p.row(i).iter().zip(&centred).map(|(x, c)| x * c).sum();
        acc += centred[i] * row;
    }
    12.0 * acc
}

/// Σ p log p with 0 log 0 = 0.
pub fn information(p: &CheckerboardCopula) -> f64 {
    p.as_slice()
        .iter()
        .filter(|&&x| x >= ZERO_MASS)
        .map(|&x| x * x.ln())
        .sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
