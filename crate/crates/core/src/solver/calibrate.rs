use std::cell::Cell;
use std::fmt;

use serde::Serialize;

use super::{run, Family, SolveReport, SolverConfig};
use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};

/// Rank correlation targeted by calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Kendall,
    Spearman,
}

impl Measure {
    fn of(self, report: &SolveReport) -> f64 {
        match self {
            Measure::Kendall => report.tau,
            Measure::Spearman => report.rho,
        }
    }

    /// Supremum of |measure| over n×n checkerboard copulas.
    pub fn bound(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Measure::Kendall => 1.0 - 1.0 / nf,
            Measure::Spearman => 1.0 - 1.0 / (nf * nf),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Kendall => "kendall",
            Measure::Spearman => "spearman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationOptions {
    /// Stop once |achieved − target| is at most this.
    pub tolerance: f64,
    /// Solver settings; the ratio field is ignored.
    pub solver: SolverConfig,
    /// Give up bracketing beyond this ratio.
    pub max_ratio: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            solver: SolverConfig::default(),
            max_ratio: 1e6,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationResult {
    pub family: Family,
    pub measure: Measure,
    pub ratio: f64,
    pub achieved_correlation: f64,
    pub target: f64,
    /// number of solves performed
    pub iterations: usize,
}

impl fmt::Display for CalibrationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family = {}", self.family)?;
        writeln!(f, "measure = {}", self.measure)?;
        writeln!(f, "target = {}", self.target)?;
        writeln!(f, "ratio = {}", self.ratio)?;
        writeln!(f, "achieved_correlation = {:.8}", self.achieved_correlation)?;
        write!(f, "iterations = {}", self.iterations)
    }
}

/// A calibration together with the solve at the returned ratio.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub result: CalibrationResult,
    pub report: SolveReport,
}

/// Finds the ratio whose solution has the target rank correlation,
/// with default options.
pub fn calibrate(n: usize, target: f64, measure: Measure, family: Family) -> Result<CalibrationResult> {
    calibrate_with(n, target, measure, family, &CalibrationOptions::default()).map(|c| c.result)
}

/// Doubles the bracket [0, 1] until it contains the target, then bisects.
/// Negative targets are solved by reflection.
pub fn calibrate_with(
    n: usize,
    target: f64,
    measure: Measure,
    family: Family,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    let bound = measure.bound(n);
    if !target.is_finite() || target.abs() >= bound {
        return Err(Error::InfeasibleTarget { target, bound });
    }
    if target < 0.0 {
        let mut c = calibrate_with(n, -target, measure, family, opts)?;
        c.report = c.report.reflected();
        c.result.ratio = -c.result.ratio;
        c.result.achieved_correlation = -c.result.achieved_correlation;
        c.result.target = target;
        return Ok(c);
    }

    let iterations = Cell::new(0);
    let eval = |ratio: f64, warm: Option<&CheckerboardCopula>| -> Result<SolveReport> {
        iterations.set(iterations.get() + 1);
        let cfg = SolverConfig { ratio, ..opts.solver };
        run(n, family, &cfg, warm)?.into_converged()
    };
    let done = |report: SolveReport| Calibration {
        result: CalibrationResult {
            family,
            measure,
            ratio: report.ratio,
            achieved_correlation: measure.of(&report),
            target,
            iterations: iterations.get(),
        },
        report,
    };

    let zero = eval(0.0, None)?;
    if (measure.of(&zero) - target).abs() <= opts.tolerance {
        return Ok(done(zero));
    }
    let mut lo = zero;
    let mut hi = eval(1.0, None)?;
    while measure.of(&hi) < target {
        if (measure.of(&hi) - target).abs() <= opts.tolerance {
            break;
        }
        let next = hi.ratio * 2.0;
        if next > opts.max_ratio {
            return Err(Error::BracketExpansion {
                target,
                reached: measure.of(&hi),
                ratio: hi.ratio,
            });
        }
        let warm = hi.copula.clone();
        lo = hi;
        hi = eval(next, Some(&warm))?;
    }

    for _ in 0..opts.max_iterations {
        for r in [&lo, &hi] {
            if (measure.of(r) - target).abs() <= opts.tolerance {
                return Ok(done(r.clone()));
            }
        }
        let mid = 0.5 * (lo.ratio + hi.ratio);
        if mid <= lo.ratio || mid >= hi.ratio {
            break;
        }
        let warm = if target - measure.of(&lo) < measure.of(&hi) - target {
            lo.copula.clone()
        } else {
            hi.copula.clone()
        };
        let m = eval(mid, Some(&warm))?;
        if measure.of(&m) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    let best = if target - measure.of(&lo) < measure.of(&hi) - target {
        lo
    } else {
        hi
    };
    if (measure.of(&best) - target).abs() <= opts.tolerance {
        Ok(done(best))
    } else {
        Err(Error::NotConverged {
            sweeps: iterations.get(),
            residual: (measure.of(&best) - target).abs(),
        })
    }
}
