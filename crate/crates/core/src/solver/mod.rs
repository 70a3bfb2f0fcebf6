//! Greedy window updates for MICK and MICS, ratio calibration and a
//! brute-force oracle for tiny grids.

mod brute;
mod calibrate;
mod greedy;
mod newton;
mod window;

use std::fmt;

use serde::Serialize;

pub use brute::{brute_force_band, brute_force_mick, BruteForceResult};
pub use calibrate::{calibrate, calibrate_with, Calibration, CalibrationOptions, CalibrationResult, Measure};
pub use newton::NEWTON_MAX_N;
pub use window::window_delta;

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};
use crate::measures::{information, kendall_tau, spearman_rho};
use crate::odds::WindowKind;

/// Which minimum-information copula to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// fixed Kendall's tau; constant pseudo log odds ratio
    Mick,
    /// fixed Spearman's rho; constant log odds ratio
    Mics,
}

impl Family {
    pub fn kind(self) -> WindowKind {
        match self {
            Family::Mick => WindowKind::Pseudo,
            Family::Mics => WindowKind::Plain,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Mick => "mick",
            Family::Mics => "mics",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "order")]
pub enum SweepOrder {
    RowMajor,
    /// windows reshuffled every sweep by a ChaCha8 generator
    RandomPermutation { seed: u64 },
}

/// How the greedy sweeps are started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceleration {
    /// Solve the stationarity system by Newton's method first, then polish
    /// with greedy sweeps. Used for n ≤ [`NEWTON_MAX_N`].
    Newton,
    /// Plain greedy sweeps from the start matrix.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// r for MICK, r′ for MICS. Negative values solve for |ratio| and
    /// reflect the columns.
    pub ratio: f64,
    pub max_sweeps: usize,
    /// Bound on the worst window mismatch |log odds − log K|.
    pub tol: f64,
    pub sweep_order: SweepOrder,
    pub acceleration: Acceleration,
}

impl SolverConfig {
    pub fn new(ratio: f64) -> Self {
        Self {
            ratio,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.ratio.is_finite() {
            return Err(Error::InvalidConfig(format!("ratio {} is not finite", self.ratio)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ratio: 0.0,
            max_sweeps: 10_000,
            tol: 1e-10,
            sweep_order: SweepOrder::RowMajor,
            acceleration: Acceleration::Newton,
        }
    }
}

/// A solved copula with its convergence record.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub copula: CheckerboardCopula,
    pub family: Family,
    pub n: usize,
    pub ratio: f64,
    pub converged: bool,
    pub sweeps_used: usize,
    pub newton_iterations: usize,
    /// worst window |log odds − log K|
    pub final_residual: f64,
    /// worst window |achieved ratio − ratio|
    pub max_ratio_deviation: f64,
    pub tau: f64,
    pub rho: f64,
    pub information: f64,
    /// updates whose shrinking entry hit the floor
    pub clamped_updates: usize,
    /// updates skipped because the window ratio was undefined
    pub skipped_windows: usize,
}

impl SolveReport {
    /// Turns a non-converged report into [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                sweeps: self.sweeps_used,
                residual: self.final_residual,
            })
        }
    }

    fn reflected(mut self) -> Self {
        self.copula = self.copula.reflect_columns();
        self.ratio = -self.ratio;
        self.tau = -self.tau;
        self.rho = -self.rho;
        self
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family = {}", self.family)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "ratio = {}", self.ratio)?;
        writeln!(f, "converged = {}", self.converged)?;
        writeln!(f, "sweeps_used = {}", self.sweeps_used)?;
        writeln!(f, "newton_iterations = {}", self.newton_iterations)?;
        writeln!(f, "final_residual = {:e}", self.final_residual)?;
        writeln!(f, "max_ratio_deviation = {:e}", self.max_ratio_deviation)?;
        writeln!(f, "tau = {:.6}", self.tau)?;
        writeln!(f, "rho = {:.6}", self.rho)?;
        writeln!(f, "information = {:.6}", self.information)?;
        writeln!(f, "clamped_updates = {}", self.clamped_updates)?;
        write!(f, "skipped_windows = {}", self.skipped_windows)
    }
}

/// Runs the solver and reports the outcome whether or not it converged.
///
/// `start` replaces the uniform starting point; it only affects the path,
/// not the fixed point.
pub fn run(n: usize, family: Family, cfg: &SolverConfig, start: Option<&CheckerboardCopula>) -> Result<SolveReport> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::GridTooSmall(n));
    }
    if let Some(s) = start {
        if s.n() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                actual: s.n(),
            });
        }
    }
    if cfg.ratio < 0.0 {
        let flipped = SolverConfig {
            ratio: -cfg.ratio,
            ..*cfg
        };
        let start = start.map(CheckerboardCopula::reflect_columns);
        return Ok(run(n, family, &flipped, start.as_ref())?.reflected());
    }

    let kind = family.kind();
    let ratio = cfg.ratio;
    let mut p = match start {
        Some(s) => s.as_slice().to_vec(),
        None => CheckerboardCopula::uniform(n)?.into_vec(),
    };
    let mut newton_iterations = 0;
    if cfg.acceleration == Acceleration::Newton && ratio != 0.0 && n <= NEWTON_MAX_N {
        if let Some(found) = newton::solve(n, kind, ratio, Some(&p)) {
            newton_iterations = found.iterations;
            if let Ok(projected) = CheckerboardCopula::sinkhorn(n, &found.p, 10_000, 1e-14) {
                p = projected.into_vec();
            }
        }
    }

    let mut sweeper = greedy::Sweeper::new(n, kind, ratio, cfg.sweep_order);
    let mut sweeps = 0;
    let mut clamped = 0;
    let mut skipped = 0;
    let (mut residual, mut deviation) = greedy::residuals(&p, n, kind, ratio);
    while residual >= cfg.tol && sweeps < cfg.max_sweeps {
        let log = sweeper.sweep(&mut p);
        clamped += log.clamped;
        skipped += log.skipped;
        sweeps += 1;
        (residual, deviation) = greedy::residuals(&p, n, kind, ratio);
    }

    let copula = CheckerboardCopula::from_raw(n, p);
    Ok(SolveReport {
        family,
        n,
        ratio,
        converged: residual < cfg.tol,
        sweeps_used: sweeps,
        newton_iterations,
        final_residual: residual,
        max_ratio_deviation: deviation,
        tau: kendall_tau(&copula),
        rho: spearman_rho(&copula),
        information: information(&copula),
        clamped_updates: clamped,
        skipped_windows: skipped,
        copula,
    })
}

/// MICK with pseudo log odds ratio `cfg.ratio`; errors if not converged.
pub fn solve_mick(n: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    run(n, Family::Mick, cfg, None)?.into_converged()
}

/// MICS with log odds ratio `cfg.ratio`; errors if not converged.
pub fn solve_mics(n: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    run(n, Family::Mics, cfg, None)?.into_converged()
}

/// Reverses the column order of `p`.
pub fn reflect_columns(p: &CheckerboardCopula) -> CheckerboardCopula {
    p.reflect_columns()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odds::local_odds;

    #[test]
    fn zero_ratio_is_uniform() {
        let rep = solve_mick(7, &SolverConfig::new(0.0)).unwrap();
        assert_eq!(rep.sweeps_used, 0);
        assert_eq!(rep.copula, CheckerboardCopula::uniform(7).unwrap());
        let rep = solve_mics(4, &SolverConfig::new(0.0)).unwrap();
        assert_eq!(rep.sweeps_used, 0);
    }

    #[test]
    fn pure_greedy_matches_newton() {
        for family in [Family::Mick, Family::Mics] {
            let plain = SolverConfig {
                acceleration: Acceleration::None,
                ..SolverConfig::new(1.5)
            };
            let a = run(5, family, &plain, None).unwrap();
            assert!(a.converged, "{family}: {}", a.final_residual);
            assert!(a.sweeps_used > 1);
            let b = run(5, family, &SolverConfig::new(1.5), None).unwrap();
            assert!(b.converged);
            assert!(a.copula.max_abs_diff(&b.copula) < 1e-10);
        }
    }

    #[test]
    fn random_order_agrees() {
        let cfg = SolverConfig {
            acceleration: Acceleration::None,
            sweep_order: SweepOrder::RandomPermutation { seed: 11 },
            ..SolverConfig::new(2.0)
        };
        let a = solve_mick(4, &cfg).unwrap();
        let b = solve_mick(4, &SolverConfig::new(2.0)).unwrap();
        assert!(a.copula.max_abs_diff(&b.copula) < 1e-10);
        let again = solve_mick(4, &cfg).unwrap();
        assert_eq!(a.copula, again.copula);
    }

    #[test]
    fn negative_ratio_reflects() {
        let pos = solve_mick(6, &SolverConfig::new(2.0)).unwrap();
        let neg = solve_mick(6, &SolverConfig::new(-2.0)).unwrap();
        assert!((pos.tau + neg.tau).abs() < 1e-12);
        assert!(neg.copula.max_abs_diff(&pos.copula.reflect_columns()) < 1e-15);
        assert_eq!(neg.ratio, -2.0);
    }

    #[test]
    fn mics_windows_share_log_odds() {
        let rep = solve_mics(6, &SolverConfig::new(0.4)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let o = local_odds(&rep.copula, i, j).unwrap();
                assert!((o.log_odds.unwrap() - 0.4).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = SolverConfig {
            acceleration: Acceleration::None,
            max_sweeps: 3,
            ..SolverConfig::new(5.0)
        };
        let rep = run(10, Family::Mick, &cfg, None).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.sweeps_used, 3);
        assert!(matches!(solve_mick(10, &cfg), Err(Error::NotConverged { sweeps: 3, .. })));
    }

    #[test]
    fn bad_config() {
        let cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(solve_mick(3, &cfg), Err(Error::InvalidConfig(_))));
        assert!(matches!(solve_mick(1, &SolverConfig::default()), Err(Error::GridTooSmall(1))));
    }
}
