use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};
use crate::odds::{local_odds, WindowKind};

/// One row of the per-window table (zero-based indices of the top-left cell).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowRecord {
    pub i: usize,
    pub j: usize,
    pub log_odds: f64,
    pub eta: f64,
    pub pseudo_log_odds: f64,
    pub minor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioAudit {
    pub kind: WindowKind,
    pub mean: f64,
    /// largest |ratio − mean| over windows
    pub max_deviation: f64,
    #[serde(skip)]
    pub windows: Vec<WindowRecord>,
}

impl RatioAudit {
    fn value(&self, w: &WindowRecord) -> f64 {
        match self.kind {
            WindowKind::Pseudo => w.pseudo_log_odds,
            WindowKind::Plain => w.log_odds,
        }
    }

    /// Largest |ratio − target| over windows.
    pub fn max_deviation_from(&self, target: f64) -> f64 {
        self.windows
            .iter()
            .map(|w| (self.value(w) - target).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "i,j,log_odds,eta,pseudo_log_odds,minor")?;
        for r in &self.windows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.i, r.j, r.log_odds, r.eta, r.pseudo_log_odds, r.minor
            )?;
        }
        Ok(())
    }
}

/// Window ratio statistics across all (n−1)² windows.
pub fn ratio_constancy(p: &CheckerboardCopula, kind: WindowKind) -> Result<RatioAudit> {
    if let Some((row, col)) = p.first_zero() {
        return Err(Error::ZeroEntry { row, col });
    }
    let n = p.n();
    let mut windows = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let o = local_odds(p, i, j)?;
            let log_odds = o.log_odds.expect("positive window");
            windows.push(WindowRecord {
                i,
                j,
                log_odds,
                eta: o.eta,
                pseudo_log_odds: log_odds / o.eta,
                minor: o.minor,
            });
        }
    }
    let mut audit = RatioAudit {
        kind,
        mean: 0.0,
        max_deviation: 0.0,
        windows,
    };
    audit.mean = audit.windows.iter().map(|w| audit.value(w)).sum::<f64>() / audit.windows.len() as f64;
    audit.max_deviation = audit.max_deviation_from(audit.mean);
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_flat() {
        let a = ratio_constancy(&CheckerboardCopula::uniform(4).unwrap(), WindowKind::Pseudo).unwrap();
        assert_eq!(a.mean, 0.0);
        assert_eq!(a.max_deviation, 0.0);
        assert_eq!(a.windows.len(), 9);
        let mut buf = Vec::new();
        a.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,log_odds,eta,pseudo_log_odds,minor\n0,0,0,0.25,0,0\n"));
    }

    #[test]
    fn zeros_rejected() {
        assert!(ratio_constancy(&CheckerboardCopula::comonotone(3).unwrap(), WindowKind::Plain).is_err());
    }
}
