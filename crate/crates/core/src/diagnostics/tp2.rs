use nalgebra::DMatrix;
use serde::Serialize;

use crate::copula::CheckerboardCopula;

/// Minors above −1e−12 count as nonnegative.
pub const TP2_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tp2Mode {
    /// contiguous 2×2 minors only
    Adjacent,
    /// every i < i′, j < j′
    AllPairs,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tp2Report {
    pub mode: Tp2Mode,
    pub min_minor: f64,
    /// rows (i, i′) and columns (j, j′) of the smallest minor
    pub location: (usize, usize, usize, usize),
    /// minors below −TP2_TOLERANCE
    pub violations: usize,
    pub holds: bool,
}

pub fn tp2_check(p: &CheckerboardCopula, mode: Tp2Mode) -> Tp2Report {
    let n = p.n();
    let mut min_minor = f64::INFINITY;
    let mut location = (0, 1, 0, 1);
    let mut violations = 0;
    let mut visit = |i: usize, i2: usize, j: usize, j2: usize| {
        let m = p.get(i, j) * p.get(i2, j2) - p.get(i2, j) * p.get(i, j2);
        if m < min_minor {
            min_minor = m;
            location = (i, i2, j, j2);
        }
        if m < -TP2_TOLERANCE {
            violations += 1;
        }
    };
    match mode {
        Tp2Mode::Adjacent => {
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    visit(i, i + 1, j, j + 1);
                }
            }
        }
        Tp2Mode::AllPairs => {
            for i in 0..n - 1 {
                for i2 in i + 1..n {
                    for j in 0..n - 1 {
                        for j2 in j + 1..n {
                            visit(i, i2, j, j2);
                        }
                    }
                }
            }
        }
    }
    Tp2Report {
        mode,
        min_minor,
        location,
        violations,
        holds: violations == 0,
    }
}

/// Smallest minor of the given order over all increasing row and column
/// index sets. Exhaustive, so meant for small grids.
pub fn min_minor_of_order(p: &CheckerboardCopula, order: usize) -> f64 {
    let n = p.n();
    assert!(order >= 1 && order <= n, "order must lie in 1..=n");
    let subsets = subsets(n, order);
    let mut worst = f64::INFINITY;
    for rows in &subsets {
        for cols in &subsets {
            let m = DMatrix::from_fn(order, order, |a, b| p.get(rows[a], cols[b]));
            worst = worst.min(m.determinant());
        }
    }
    worst
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comonotone_is_tp2() {
        let c = CheckerboardCopula::comonotone(5).unwrap();
        assert!(tp2_check(&c, Tp2Mode::Adjacent).holds);
        assert!(tp2_check(&c, Tp2Mode::AllPairs).holds);
    }

    #[test]
    fn anti_comonotone_corner() {
        let a = CheckerboardCopula::anti_comonotone(3).unwrap();
        let r = tp2_check(&a, Tp2Mode::AllPairs);
        assert!(!r.holds);
        assert!((r.min_minor + 1.0 / 9.0).abs() < 1e-15);
        let (i, i2, j, j2) = r.location;
        assert_eq!(a.get(i, j) * a.get(i2, j2) - a.get(i2, j) * a.get(i, j2), r.min_minor);
        assert!(!tp2_check(&a, Tp2Mode::Adjacent).holds);
    }

    #[test]
    fn minors_of_order_one_are_entries() {
        let c = CheckerboardCopula::comonotone(4).unwrap();
        assert_eq!(min_minor_of_order(&c, 1), 0.0);
        assert!((min_minor_of_order(&c, 4) - 1.0 / 256.0).abs() < 1e-15);
    }
}
