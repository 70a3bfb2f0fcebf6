use serde::Serialize;

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};

/// Which window ratio a solver or audit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// log odds divided by the window mass η (MICK)
    Pseudo,
    /// plain log odds (MICS)
    Plain,
}

/// Odds statistics of one 2×2 window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalOdds {
    /// `None` when an entry of the window is zero.
    pub log_odds: Option<f64>,
    pub pseudo_log_odds: Option<f64>,
    pub eta: f64,
    /// p_ij p_{i+1,j+1} − p_{i+1,j} p_{i,j+1}
    pub minor: f64,
}

impl LocalOdds {
    pub fn ratio(&self, kind: WindowKind) -> Option<f64> {
        match kind {
            WindowKind::Pseudo => self.pseudo_log_odds,
            WindowKind::Plain => self.log_odds,
        }
    }
}

/// Odds of the window whose top-left cell is (i, j), zero-based.
pub fn local_odds(p: &CheckerboardCopula, i: usize, j: usize) -> Result<LocalOdds> {
    let n = p.n();
    if i + 1 >= n || j + 1 >= n {
        return Err(Error::WindowOutOfRange { row: i, col: j, n });
    }
    let (a, b, c, d) = (p.get(i, j), p.get(i, j + 1), p.get(i + 1, j), p.get(i + 1, j + 1));
    let eta = a + b + c + d;
    let log_odds = (a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0).then(|| window_log_odds(a, b, c, d));
    Ok(LocalOdds {
        log_odds,
        pseudo_log_odds: log_odds.map(|l| l / eta),
        eta,
        minor: a * d - b * c,
    })
}

/// log(ad / bc), evaluated as two ratios to keep relative accuracy.
#[inline]
pub(crate) fn window_log_odds(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((a / b) * (d / c)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_window() {
        let u = CheckerboardCopula::uniform(4).unwrap();
        let o = local_odds(&u, 2, 1).unwrap();
        assert_eq!(o.log_odds, Some(0.0));
        assert_eq!(o.pseudo_log_odds, Some(0.0));
        assert!((o.eta - 4.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn zero_window_is_undefined() {
        let c = CheckerboardCopula::comonotone(3).unwrap();
        let o = local_odds(&c, 0, 0).unwrap();
        assert!(o.log_odds.is_none());
        assert!((o.minor - 1.0 / 9.0).abs() < 1e-16);
        assert!(local_odds(&c, 2, 0).is_err());
    }
}
