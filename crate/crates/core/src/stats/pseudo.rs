use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// How ranks 1..=N are mapped into (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankConvention {
    /// (rank − 0.5) / N
    #[default]
    MidRank,
    /// rank / (N + 1)
    Scaled,
}

impl RankConvention {
    fn map(self, rank: f64, len: usize) -> f64 {
        match self {
            RankConvention::MidRank => (rank - 0.5) / len as f64,
            RankConvention::Scaled => rank / (len + 1) as f64,
        }
    }
}

/// A bivariate point set on (0, 1)².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoObservations {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl PseudoObservations {
    /// Wraps points already in (0, 1)².
    pub fn from_points(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch(u.len(), v.len()));
        }
        if let Some(index) = u
            .iter()
            .chain(&v)
            .position(|&x| !(x > 0.0 && x < 1.0))
        {
            return Err(Error::OutOfUnitInterval {
                index: index % u.len().max(1),
            });
        }
        Ok(Self { u, v })
    }

    /// Rank-transforms raw data, averaging the ranks of ties.
    pub fn from_data(x: &[f64], y: &[f64], convention: RankConvention) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(Error::TooFewObservations {
                needed: 2,
                got: x.len(),
            });
        }
        let len = x.len();
        let to_unit = |r: Vec<f64>| r.into_iter().map(|r| convention.map(r, len)).collect();
        Ok(Self {
            u: to_unit(average_ranks(x)),
            v: to_unit(average_ranks(y)),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Two columns `u,v` with a header line.
    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "u,v")?;
        for (a, b) in self.u.iter().zip(&self.v) {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    }
}

/// One-based ranks with ties given their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_share_ranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn conventions() {
        let x = [10.0, 20.0, 30.0, 40.0];
        let mid = PseudoObservations::from_data(&x, &x, RankConvention::MidRank).unwrap();
        assert_eq!(mid.u(), &[0.125, 0.375, 0.625, 0.875]);
        let scaled = PseudoObservations::from_data(&x, &x, RankConvention::Scaled).unwrap();
        assert_eq!(scaled.u(), &[0.2, 0.4, 0.6, 0.8]);
    }

    #[test]
    fn validation() {
        assert!(PseudoObservations::from_points(vec![0.5, 1.0], vec![0.5, 0.5]).is_err());
        assert!(PseudoObservations::from_points(vec![0.5], vec![0.5, 0.5]).is_err());
        assert!(PseudoObservations::from_data(&[1.0], &[1.0], RankConvention::MidRank).is_err());
    }
}
