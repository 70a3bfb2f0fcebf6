use std::fmt;

use serde::Serialize;

use super::pseudo::{average_ranks, PseudoObservations};
use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};

/// Rank statistics of a bivariate sample at the 5% and 1% tail levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceSummary {
    pub tau: f64,
    pub rho: f64,
    pub lower_tail_5: f64,
    pub upper_tail_5: f64,
    pub lower_tail_1: f64,
    pub upper_tail_1: f64,
}

impl DependenceSummary {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.tau,
            self.rho,
            self.lower_tail_5,
            self.upper_tail_5,
            self.lower_tail_1,
            self.upper_tail_1,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            tau: a[0],
            rho: a[1],
            lower_tail_5: a[2],
            upper_tail_5: a[3],
            lower_tail_1: a[4],
            upper_tail_1: a[5],
        }
    }

    /// Component-wise mean.
    pub fn mean(items: &[DependenceSummary]) -> Option<Self> {
        if items.is_empty() {
            return None;
        }
        let mut acc = [0.0; 6];
        for s in items {
            for (a, x) in acc.iter_mut().zip(s.as_array()) {
                *a += x;
            }
        }
        Some(Self::from_array(acc.map(|a| a / items.len() as f64)))
    }
}

impl fmt::Display for DependenceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tau = {:.6}", self.tau)?;
        writeln!(f, "rho = {:.6}", self.rho)?;
        writeln!(f, "lower_tail_5 = {:.6}", self.lower_tail_5)?;
        writeln!(f, "upper_tail_5 = {:.6}", self.upper_tail_5)?;
        writeln!(f, "lower_tail_1 = {:.6}", self.lower_tail_1)?;
        write!(f, "upper_tail_1 = {:.6}", self.upper_tail_1)
    }
}

pub fn summarize(obs: &PseudoObservations) -> Result<DependenceSummary> {
    let (l5, u5) = tail_dependence(obs, 5.0)?;
    let (l1, u1) = tail_dependence(obs, 1.0)?;
    Ok(DependenceSummary {
        tau: empirical_tau(obs)?,
        rho: empirical_rho(obs)?,
        lower_tail_5: l5,
        upper_tail_5: u5,
        lower_tail_1: l1,
        upper_tail_1: u1,
    })
}

/// Kendall's tau-a: (concordant − discordant) / C(N, 2), ties counting as
/// neither. O(N log N) by merge-sort inversion counting.
pub fn empirical_tau(obs: &PseudoObservations) -> Result<f64> {
    let len = obs.len();
    if len < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: len });
    }
    let (u, v) = (obs.u(), obs.v());
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(v[a].total_cmp(&v[b])));
    let pairs = |t: u64| t * (t.saturating_sub(1)) / 2;

    let mut tied_u = 0u64;
    let mut tied_both = 0u64;
    let mut k = 0;
    while k < len {
        let mut e = k + 1;
        while e < len && u[order[e]] == u[order[k]] {
            e += 1;
        }
        tied_u += pairs((e - k) as u64);
        let mut s = k;
        while s < e {
            let mut t = s + 1;
            while t < e && v[order[t]] == v[order[s]] {
                t += 1;
            }
            tied_both += pairs((t - s) as u64);
            s = t;
        }
        k = e;
    }

    let mut seq: Vec<f64> = order.iter().map(|&i| v[i]).collect();
    let mut buf = vec![0.0; len];
    let swaps = inversions(&mut seq, &mut buf);

    let mut tied_v = 0u64;
    let mut k = 0;
    while k < len {
        let mut e = k + 1;
        while e < len && seq[e] == seq[k] {
            e += 1;
        }
        tied_v += pairs((e - k) as u64);
        k = e;
    }

    let total = pairs(len as u64);
    let numer = total as f64 - tied_u as f64 - tied_v as f64 + tied_both as f64 - 2.0 * swaps as f64;
    Ok(numer / total as f64)
}

/// Sorts `a` ascending and returns the number of strictly inverted pairs.
fn inversions(a: &mut [f64], buf: &mut [f64]) -> u64 {
    let len = a.len();
    if len < 2 {
        return 0;
    }
    let mid = len / 2;
    let (left, right) = a.split_at_mut(mid);
    let mut count = inversions(left, &mut buf[..mid]) + inversions(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            count += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    a.copy_from_slice(&buf[..len]);
    count
}

/// Pearson correlation of the average ranks of u and v.
pub fn empirical_rho(obs: &PseudoObservations) -> Result<f64> {
    let len = obs.len();
    if len < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: len });
    }
    let ru = average_ranks(obs.u());
    let rv = average_ranks(obs.v());
    let mean = (len as f64 + 1.0) / 2.0;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in ru.iter().zip(&rv) {
        let (x, y) = (a - mean, b - mean);
        suv += x * y;
        suu += x * x;
        svv += y * y;
    }
    Ok(suv / (suu * svv).sqrt())
}

/// Empirical lower and upper tail dependence at level `percent`.
///
/// lower = #(u < q and v < q) / #(u < q) and
/// upper = #(u > 1 − q and v > 1 − q) / #(u > 1 − q), with q = percent/100.
pub fn tail_dependence(obs: &PseudoObservations, percent: f64) -> Result<(f64, f64)> {
    if !(percent > 0.0 && percent < 50.0) {
        return Err(Error::InvalidConfig(format!("tail level {percent}% is outside (0, 50)")));
    }
    let q = percent / 100.0;
    let hi = 1.0 - q;
    let (mut lo_cond, mut lo_both, mut up_cond, mut up_both) = (0usize, 0usize, 0usize, 0usize);
    for (&a, &b) in obs.u().iter().zip(obs.v()) {
        if a < q {
            lo_cond += 1;
            lo_both += (b < q) as usize;
        }
        if a > hi {
            up_cond += 1;
            up_both += (b > hi) as usize;
        }
    }
    if lo_cond == 0 {
        return Err(Error::EmptyConditioningSet { side: "lower", percent });
    }
    if up_cond == 0 {
        return Err(Error::EmptyConditioningSet { side: "upper", percent });
    }
    Ok((lo_both as f64 / lo_cond as f64, up_both as f64 / up_cond as f64))
}

/// Tail dependence of the checkerboard density itself at level `percent`.
pub fn model_tail_dependence(p: &CheckerboardCopula, percent: f64) -> Result<(f64, f64)> {
    if !(percent > 0.0 && percent < 50.0) {
        return Err(Error::InvalidConfig(format!("tail level {percent}% is outside (0, 50)")));
    }
    let n = p.n();
    let nf = n as f64;
    let q = percent / 100.0;
    // overlap of cell k's interval with [0, q), as a fraction of the cell
    let share = |k: usize| ((q - k as f64 / nf) * nf).clamp(0.0, 1.0);
    let (mut lower, mut upper) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            lower += p.get(i, j) * share(i) * share(j);
            upper += p.get(i, j) * share(n - 1 - i) * share(n - 1 - j);
        }
    }
    Ok((lower / q, upper / q))
}

/// Cell-frequency histogram on an n×n grid scaled to copula margins.
pub fn empirical_checkerboard(obs: &PseudoObservations, n: usize) -> Result<CheckerboardCopula> {
    if n < 2 {
        return Err(Error::GridTooSmall(n));
    }
    if obs.len() < n * n {
        return Err(Error::TooFewObservations {
            needed: n * n,
            got: obs.len(),
        });
    }
    let nf = n as f64;
    let mut counts = vec![0.0; n * n];
    for (&a, &b) in obs.u().iter().zip(obs.v()) {
        let i = ((a * nf) as usize).min(n - 1);
        let j = ((b * nf) as usize).min(n - 1);
        counts[i * n + j] += 1.0;
    }
    let total = obs.len() as f64;
    counts.iter_mut().for_each(|c| *c /= total);
    CheckerboardCopula::sinkhorn(n, &counts, 500, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(u: &[f64], v: &[f64]) -> PseudoObservations {
        PseudoObservations::from_points(u.to_vec(), v.to_vec()).unwrap()
    }

    fn naive_tau(u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        let len = u.len();
        for i in 0..len {
            for j in i + 1..len {
                let d = (u[i] - u[j]) * (v[i] - v[j]);
                s += if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
            }
        }
        s / (len * (len - 1) / 2) as f64
    }

    #[test]
    fn tau_with_ties_matches_naive() {
        let u = [0.1, 0.2, 0.2, 0.4, 0.5, 0.5, 0.5, 0.9];
        let v = [0.3, 0.1, 0.3, 0.3, 0.8, 0.2, 0.8, 0.05];
        let t = empirical_tau(&obs(&u, &v)).unwrap();
        assert!((t - naive_tau(&u, &v)).abs() < 1e-15);
    }

    #[test]
    fn monotone_samples() {
        let u = [0.1, 0.3, 0.5, 0.7, 0.9];
        let down = [0.9, 0.7, 0.5, 0.3, 0.1];
        assert_eq!(empirical_tau(&obs(&u, &u)).unwrap(), 1.0);
        assert_eq!(empirical_tau(&obs(&u, &down)).unwrap(), -1.0);
        assert!((empirical_rho(&obs(&u, &u)).unwrap() - 1.0).abs() < 1e-15);
        assert!((empirical_rho(&obs(&u, &down)).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn tails_of_increasing_sample() {
        let u: Vec<f64> = (1..=200).map(|k| (k as f64 - 0.5) / 200.0).collect();
        let (l, r) = tail_dependence(&obs(&u, &u), 5.0).unwrap();
        assert_eq!((l, r), (1.0, 1.0));
        assert!(tail_dependence(&obs(&u[100..110], &u[100..110]), 1.0).is_err());
    }

    #[test]
    fn model_tails() {
        let c = CheckerboardCopula::comonotone(10).unwrap();
        let (l, u) = model_tail_dependence(&c, 5.0).unwrap();
        // mass 0.1 on the first cell spread uniformly: (0.05·10)² · 0.1 / 0.05
        assert!((l - 0.5).abs() < 1e-12);
        assert!((u - 0.5).abs() < 1e-12);
        let uni = CheckerboardCopula::uniform(7).unwrap();
        let (l, _) = model_tail_dependence(&uni, 3.0).unwrap();
        assert!((l - 0.03).abs() < 1e-12);
    }
}
