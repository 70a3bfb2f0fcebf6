use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::window::{update, Update};
use super::SweepOrder;
use crate::odds::{window_log_odds, WindowKind};

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct SweepLog {
    pub clamped: usize,
    pub skipped: usize,
}

/// Runs window updates over a row-major n×n buffer.
pub(crate) struct Sweeper {
    n: usize,
    kind: WindowKind,
    ratio: f64,
    windows: Vec<(usize, usize)>,
    rng: Option<ChaCha8Rng>,
}

impl Sweeper {
    pub fn new(n: usize, kind: WindowKind, ratio: f64, order: SweepOrder) -> Self {
        let windows = (0..n - 1).flat_map(|i| (0..n - 1).map(move |j| (i, j))).collect();
        let rng = match order {
            SweepOrder::RowMajor => None,
            SweepOrder::RandomPermutation { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Self {
            n,
            kind,
            ratio,
            windows,
            rng,
        }
    }

    pub fn sweep(&mut self, p: &mut [f64]) -> SweepLog {
        if let Some(rng) = self.rng.as_mut() {
            self.windows.shuffle(rng);
        }
        let n = self.n;
        let mut log = SweepLog::default();
        for &(i, j) in &self.windows {
            let k = i * n + j;
            let (a, b, c, d) = (p[k], p[k + 1], p[k + n], p[k + n + 1]);
            let log_k = match self.kind {
                WindowKind::Pseudo => self.ratio * (a + b + c + d),
                WindowKind::Plain => self.ratio,
            };
            match update(a, b, c, d, log_k) {
                Update::Moved { entries, clamped } => {
                    p[k] = entries[0];
                    p[k + 1] = entries[1];
                    p[k + n] = entries[2];
                    p[k + n + 1] = entries[3];
                    log.clamped += clamped as usize;
                }
                Update::Unchanged => {}
                Update::Undefined => log.skipped += 1,
            }
        }
        log
    }
}

/// Worst window mismatch as (log-odds units, ratio units).
pub(crate) fn residuals(p: &[f64], n: usize, kind: WindowKind, ratio: f64) -> (f64, f64) {
    let mut worst_log = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let k = i * n + j;
            let (a, b, c, d) = (p[k], p[k + 1], p[k + n], p[k + n + 1]);
            if a <= 0.0 || b <= 0.0 || c <= 0.0 || d <= 0.0 {
                return (f64::INFINITY, f64::INFINITY);
            }
            let l = window_log_odds(a, b, c, d);
            let (lr, rr) = match kind {
                WindowKind::Pseudo => {
                    let eta = a + b + c + d;
                    ((l - ratio * eta).abs(), (l / eta - ratio).abs())
                }
                WindowKind::Plain => ((l - ratio).abs(), (l - ratio).abs()),
            };
            worst_log = worst_log.max(lr);
            worst_ratio = worst_ratio.max(rr);
        }
    }
    (worst_log, worst_ratio)
}
