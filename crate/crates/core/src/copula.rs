use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Margin tolerance for copulas built in memory.
pub const INTERNAL_TOLERANCE: f64 = 1e-12;
/// Margin tolerance for copulas read from files.
pub const FILE_TOLERANCE: f64 = 1e-9;

/// An n×n nonnegative matrix whose rows and columns each sum to 1/n.
///
/// Entries are stored row-major; `p[i * n + j]` is the mass of the cell in
/// row `i`, column `j` (both zero-based).
#[derive(Clone, PartialEq)]
pub struct CheckerboardCopula {
    n: usize,
    p: Vec<f64>,
}

impl CheckerboardCopula {
    /// Validates `p` (row-major, length n²) at the internal tolerance.
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(n, p, INTERNAL_TOLERANCE)
    }

    pub fn with_tolerance(n: usize, p: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_n(n)?;
        if p.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                actual: p.len(),
            });
        }
        for (k, &x) in p.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: k / n,
                    col: k % n,
                });
            }
            if x < 0.0 {
                return Err(Error::NegativeEntry {
                    row: k / n,
                    col: k % n,
                    value: x,
                });
            }
        }
        let expected = 1.0 / n as f64;
        for i in 0..n {
            let sum: f64 = p[i * n..(i + 1) * n].iter().sum();
            if (sum - expected).abs() > tolerance {
                return Err(Error::MarginViolation {
                    axis: "row",
                    index: i,
                    sum,
                    expected,
                    tolerance,
                });
            }
        }
        for j in 0..n {
            let sum: f64 = (0..n).map(|i| p[i * n + j]).sum();
            if (sum - expected).abs() > tolerance {
                return Err(Error::MarginViolation {
                    axis: "column",
                    index: j,
                    sum,
                    expected,
                    tolerance,
                });
            }
        }
        Ok(Self { n, p })
    }

    /// Builds a copula from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut p = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            p.extend_from_slice(row);
        }
        Self::new(n, p)
    }

    /// Caller guarantees validity.
    pub(crate) fn from_raw(n: usize, p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), n * n);
        Self { n, p }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_n(n)?;
        let v = 1.0 / (n * n) as f64;
        Ok(Self { n, p: vec![v; n * n] })
    }

    pub fn comonotone(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0 / n as f64;
        }
        Ok(Self { n, p })
    }

    pub fn anti_comonotone(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + (n - 1 - i)] = 1.0 / n as f64;
        }
        Ok(Self { n, p })
    }

    /// Scales a positive weight matrix to copula margins by alternating
    /// row and column normalization (Sinkhorn / iterative proportional fitting).
    ///
    /// Stops once every margin is within `tol` of 1/n.
    pub fn sinkhorn(n: usize, weights: &[f64], max_iterations: usize, tol: f64) -> Result<Self> {
        check_n(n)?;
        if weights.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                actual: weights.len(),
            });
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeEntry {
                    row: k / n,
                    col: k % n,
                    value: w,
                });
            }
        }
        let target = 1.0 / n as f64;
        let mut p = weights.to_vec();
        let mut deviation = f64::INFINITY;
        for _ in 0..max_iterations {
            for i in 0..n {
                let row = &mut p[i * n..(i + 1) * n];
                let s: f64 = row.iter().sum();
                if s <= 0.0 {
                    return Err(Error::ScalingFailed {
                        iterations: 0,
                        deviation: f64::INFINITY,
                    });
                }
                let f = target / s;
                row.iter_mut().for_each(|x| *x *= f);
            }
            let mut col = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    col[j] += p[i * n + j];
                }
            }
            if col.iter().any(|&s| s <= 0.0) {
                return Err(Error::ScalingFailed {
                    iterations: 0,
                    deviation: f64::INFINITY,
                });
            }
            for i in 0..n {
                for j in 0..n {
                    p[i * n + j] *= target / col[j];
                }
            }
            deviation = (0..n)
                .map(|i| (p[i * n..(i + 1) * n].iter().sum::<f64>() - target).abs())
                .fold(0.0, f64::max);
            if deviation <= tol {
                return Ok(Self { n, p });
            }
        }
        Err(Error::ScalingFailed {
            iterations: max_iterations,
            deviation,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    /// Row-major entries, i.e. the vectorization used throughout the crate.
    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p[j * n + i] = self.p[i * n + j];
            }
        }
        Self { n, p }
    }

    /// Reverses the column order. Negates Kendall's tau and Spearman's rho.
    pub fn reflect_columns(&self) -> Self {
        let n = self.n;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p[i * n + (n - 1 - j)] = self.p[i * n + j];
            }
        }
        Self { n, p }
    }

    pub fn min_entry(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First zero entry in row-major order, if any.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        self.p
            .iter()
            .position(|&x| x <= 0.0)
            .map(|k| (k / self.n, k % self.n))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "grid sizes differ");
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of any row or column sum from 1/n.
    pub fn margin_error(&self) -> f64 {
        let n = self.n;
        let t = 1.0 / n as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max((self.row(i).iter().sum::<f64>() - t).abs());
            worst = worst.max(((0..n).map(|k| self.p[k * n + i]).sum::<f64>() - t).abs());
        }
        worst
    }

    /// Reads the headerless CSV matrix format, validating at 1e-9.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::BadNumber {
                        line: line + 1,
                        value: f.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        let mut p = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            p.extend_from_slice(row);
        }
        Self::with_tolerance(n, p, FILE_TOLERANCE)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes each row as comma-separated shortest round-trip decimals.
    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for CheckerboardCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CheckerboardCopula")
            .field("n", &self.n)
            .field("p", &self.to_rows())
            .finish()
    }
}

impl Serialize for CheckerboardCopula {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CheckerboardCopula", 2)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("p", &self.to_rows())?;
        s.end()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::GridTooSmall(n))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        let u = CheckerboardCopula::uniform(3).unwrap();
        assert!(u.as_slice().iter().all(|&x| x == 1.0 / 9.0));
        let c = CheckerboardCopula::comonotone(3).unwrap();
        assert_eq!(c.get(1, 1), 1.0 / 3.0);
        assert_eq!(c.get(0, 1), 0.0);
        let a = CheckerboardCopula::anti_comonotone(3).unwrap();
        assert_eq!(a.get(0, 2), 1.0 / 3.0);
        assert_eq!(a.get(1, 1), 1.0 / 3.0);
        assert!(matches!(
            CheckerboardCopula::uniform(1),
            Err(Error::GridTooSmall(1))
        ));
    }

    #[test]
    fn rejects_bad_margins() {
        let err = CheckerboardCopula::from_rows(&[vec![0.5, 0.0], vec![0.25, 0.25]]).unwrap_err();
        assert!(matches!(err, Error::MarginViolation { axis: "column", index: 0, .. }));
        let err = CheckerboardCopula::from_rows(&[vec![0.75, -0.25], vec![-0.25, 0.75]]).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { row: 0, col: 1, .. }));
    }

    #[test]
    fn reflect_and_transpose() {
        let c = CheckerboardCopula::comonotone(4).unwrap();
        assert_eq!(c.reflect_columns(), CheckerboardCopula::anti_comonotone(4).unwrap());
        let p = CheckerboardCopula::from_rows(&[
            vec![1.0 / 9.0, 2.0 / 9.0, 0.0],
            vec![1.0 / 9.0, 0.0, 2.0 / 9.0],
            vec![1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
        ])
        .unwrap();
        assert_eq!(p.reflect_columns().reflect_columns(), p);
        assert_eq!(p.transpose().get(0, 1), 1.0 / 9.0);
    }

    #[test]
    fn csv_round_trip() {
        let p = CheckerboardCopula::sinkhorn(4, &[1., 2., 3., 4., 5., 6., 7., 8., 9., 1., 2., 3., 4., 5., 6., 7.], 1000, 1e-15)
            .unwrap();
        let mut buf = Vec::new();
        p.write_csv_to(&mut buf).unwrap();
        let q = CheckerboardCopula::from_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn csv_tolerance_is_loose() {
        let text = "0.2500000001,0.25\n0.25,0.2499999999\n";
        assert!(CheckerboardCopula::from_csv_reader(text.as_bytes()).is_ok());
        let text = "0.26,0.24\n0.24,0.26\n0.0,0.0\n";
        assert!(CheckerboardCopula::from_csv_reader(text.as_bytes()).is_err());
    }

    #[test]
    fn sinkhorn_hits_margins() {
        let w: Vec<f64> = (1..=25).map(|k| (k as f64).sqrt()).collect();
        let p = CheckerboardCopula::sinkhorn(5, &w, 10_000, 1e-15).unwrap();
        assert!(p.margin_error() < 1e-14);
    }
}
