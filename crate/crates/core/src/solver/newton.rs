//! Newton iteration on the log-domain stationarity system, used to warm
//! start the greedy sweeps.
//!
//! Unknowns are ℓ = log p (n²), row potentials u (n) and column potentials
//! v (n−1, the last one pinned to 0). The equations are
//! ℓ_ij − u_i − v_j − φ_ij = 0 plus the row and column margins, where
//! φ = −r·Wp for the pseudo kind and r·ij for the plain kind. Any solution
//! has every window log odds equal to r·η (pseudo) or r (plain).

use nalgebra::{DMatrix, DVector};

use crate::odds::WindowKind;
use crate::structure::{apply_w, xi_entry};

/// Largest grid the dense Newton system is built for.
pub const NEWTON_MAX_N: usize = 40;

const MAX_ITERATIONS: usize = 100;
const TARGET: f64 = 1e-12;
const ACCEPTABLE: f64 = 1e-8;

pub(crate) struct NewtonResult {
    /// Row-major entries, margins satisfied only to solver accuracy.
    pub p: Vec<f64>,
    pub iterations: usize,
}

/// Solves from `start` (or uniform), falling back to continuation in the
/// ratio when the direct attempt stalls.
pub(crate) fn solve(n: usize, kind: WindowKind, ratio: f64, start: Option<&[f64]>) -> Option<NewtonResult> {
    let initial: Vec<f64> = match start {
        Some(p) if p.iter().all(|&x| x > 0.0) => p.to_vec(),
        _ => vec![1.0 / (n * n) as f64; n * n],
    };
    let mut total = 0;
    let direct = System::new(n, kind, ratio).run(&initial);
    total += direct.1;
    if let Some(p) = direct.0 {
        return Some(NewtonResult { p, iterations: total });
    }
    let uniform = vec![1.0 / (n * n) as f64; n * n];
    'steps: for steps in [4usize, 16, 64] {
        let mut p = uniform.clone();
        for k in 1..=steps {
            let (found, it) = System::new(n, kind, ratio * k as f64 / steps as f64).run(&p);
            total += it;
            match found {
                Some(q) => p = q,
                None => continue 'steps,
            }
        }
        return Some(NewtonResult { p, iterations: total });
    }
    None
}

struct System {
    n: usize,
    kind: WindowKind,
    ratio: f64,
}

impl System {
    fn new(n: usize, kind: WindowKind, ratio: f64) -> Self {
        Self { n, kind, ratio }
    }

    fn size(&self) -> usize {
        self.n * self.n + 2 * self.n - 1
    }

    fn run(&self, start: &[f64]) -> (Option<Vec<f64>>, usize) {
        let n = self.n;
        let nn = n * n;
        let mut z = DVector::zeros(self.size());
        for k in 0..nn {
            z[k] = start[k].ln();
        }
        // potentials from row then column means of ℓ − φ
        let phi = self.phi(start);
        let g: Vec<f64> = (0..nn).map(|k| z[k] - phi[k]).collect();
        let mut u = vec![0.0; n];
        for i in 0..n {
            u[i] = g[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64;
        }
        let mut v = vec![0.0; n];
        for j in 0..n {
            v[j] = (0..n).map(|i| g[i * n + j] - u[i]).sum::<f64>() / n as f64;
        }
        for i in 0..n {
            z[nn + i] = u[i] + v[n - 1];
        }
        for j in 0..n - 1 {
            z[nn + n + j] = v[j] - v[n - 1];
        }

        let mut f = self.residual(&z);
        let mut norm = f.norm();
        for it in 1..=MAX_ITERATIONS {
            let Some(step) = self.jacobian(&z).lu().solve(&(-&f)) else {
                return (self.accept(&z, &f), it);
            };
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-10 {
                let trial = &z + &step * t;
                let ft = self.residual(&trial);
                let nt = ft.norm();
                if nt.is_finite() && nt < (1.0 - 1e-4 * t) * norm {
                    z = trial;
                    f = ft;
                    norm = nt;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if f.amax() <= TARGET || !moved {
                return (self.accept(&z, &f), it);
            }
        }
        (self.accept(&z, &f), MAX_ITERATIONS)
    }

    fn accept(&self, z: &DVector<f64>, f: &DVector<f64>) -> Option<Vec<f64>> {
        (f.amax() <= ACCEPTABLE).then(|| (0..self.n * self.n).map(|k| z[k].exp()).collect())
    }

    fn phi(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.kind {
            WindowKind::Pseudo => apply_w(p, n).into_iter().map(|x| -self.ratio * x).collect(),
            WindowKind::Plain => (0..n * n)
                .map(|k| self.ratio * (k / n) as f64 * (k % n) as f64)
                .collect(),
        }
    }

    fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let nn = n * n;
        let p: Vec<f64> = (0..nn).map(|k| z[k].exp()).collect();
        let phi = self.phi(&p);
        let mut f = DVector::zeros(self.size());
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let vj = if j + 1 < n { z[nn + n + j] } else { 0.0 };
                f[k] = z[k] - z[nn + i] - vj - phi[k];
            }
        }
        let nf = n as f64;
        for i in 0..n {
            f[nn + i] = nf * p[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0;
        }
        for j in 0..n - 1 {
            f[nn + n + j] = nf * (0..n).map(|i| p[i * n + j]).sum::<f64>() - 1.0;
        }
        f
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let nn = n * n;
        let nf = n as f64;
        let m = self.size();
        let p: Vec<f64> = (0..nn).map(|k| z[k].exp()).collect();
        let mut jac = DMatrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                let a = i * n + j;
                jac[(a, a)] = 1.0;
                jac[(a, nn + i)] = -1.0;
                if j + 1 < n {
                    jac[(a, nn + n + j)] = -1.0;
                }
                if self.kind == WindowKind::Pseudo {
                    for k in 0..n {
                        for l in 0..n {
                            let w = 0.5
                                * (xi_entry(i, k) * xi_entry(l, j) + xi_entry(k, i) * xi_entry(j, l));
                            if w != 0.0 {
                                let b = k * n + l;
                                jac[(a, b)] += self.ratio * w * p[b];
                            }
                        }
                    }
                }
                jac[(nn + i, a)] = nf * p[a];
                if j + 1 < n {
                    jac[(nn + n + j, a)] = nf * p[a];
                }
            }
        }
        jac
    }
}
