//! Price files to pseudo-observations.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{PseudoObservations, RankConvention};

/// Cell values treated as missing.
const MISSING: [&str; 7] = ["", "NA", "N/A", "NaN", "nan", "null", "."];

/// One named column of a price file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Two series on a shared, strictly increasing calendar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedSeries {
    pub timestamps: Vec<NaiveDate>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl AlignedSeries {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Reads two price columns of one file. The timestamp is the first column.
pub fn load_prices(path: impl AsRef<Path>, column_x: &str, column_y: &str) -> Result<AlignedSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_prices(file, column_x, column_y)
}

pub fn read_prices<R: Read>(reader: R, column_x: &str, column_y: &str) -> Result<AlignedSeries> {
    let table = read_table(reader, &[column_x, column_y])?;
    let mut timestamps = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (t, vals) in table {
        if let (Some(a), Some(b)) = (vals[0], vals[1]) {
            timestamps.push(t);
            x.push(a);
            y.push(b);
        }
    }
    check_rows(timestamps.len())?;
    Ok(AlignedSeries { timestamps, x, y })
}

/// Reads one price column, dropping missing cells.
pub fn load_series(path: impl AsRef<Path>, column: &str) -> Result<Series> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(file, column)
}

pub fn read_series<R: Read>(reader: R, column: &str) -> Result<Series> {
    let table = read_table(reader, &[column])?;
    let (timestamps, values) = table
        .into_iter()
        .filter_map(|(t, v)| v[0].map(|x| (t, x)))
        .unzip();
    Ok(Series { timestamps, values })
}

/// Inner join of two series on their timestamps.
pub fn align(a: &Series, b: &Series) -> Result<AlignedSeries> {
    let lookup: HashMap<NaiveDate, f64> = b.timestamps.iter().copied().zip(b.values.iter().copied()).collect();
    let mut out = AlignedSeries {
        timestamps: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
    };
    for (t, &x) in a.timestamps.iter().zip(&a.values) {
        if let Some(&y) = lookup.get(t) {
            out.timestamps.push(*t);
            out.x.push(x);
            out.y.push(y);
        }
    }
    check_rows(out.len())?;
    Ok(out)
}

/// r_t = log p_t − log p_{t−1}, stamped with the later date.
pub fn log_returns(s: &AlignedSeries) -> Result<AlignedSeries> {
    for (k, (&a, &b)) in s.x.iter().zip(&s.y).enumerate() {
        for v in [a, b] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::NonPositivePrice {
                    timestamp: s.timestamps[k].to_string(),
                    value: v,
                });
            }
        }
    }
    let diff = |v: &[f64]| v.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    Ok(AlignedSeries {
        timestamps: s.timestamps.iter().skip(1).copied().collect(),
        x: diff(&s.x),
        y: diff(&s.y),
    })
}

pub fn to_pseudo_observations(s: &AlignedSeries, convention: RankConvention) -> Result<PseudoObservations> {
    PseudoObservations::from_data(&s.x, &s.y, convention)
}

type Table = Vec<(NaiveDate, Vec<Option<f64>>)>;

/// Parses the timestamp column and the named columns, sorted by date.
fn read_table<R: Read>(reader: R, columns: &[&str]) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| Error::MissingColumn(c.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut rows: Table = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let line = k + 2;
        let stamp = record.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(stamp, "%Y-%m-%d").map_err(|_| Error::BadTimestamp {
            line,
            value: stamp.to_string(),
        })?;
        let values = index
            .iter()
            .map(|&i| {
                let cell = record.get(i).unwrap_or("");
                if MISSING.contains(&cell) {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::BadNumber {
                        line,
                        value: cell.to_string(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, values));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateTimestamp(w[0].0.to_string()));
    }
    Ok(rows)
}

fn check_rows(got: usize) -> Result<()> {
    if got < 3 {
        Err(Error::TooFewObservations { needed: 3, got })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_missing_rows() {
        let text = "date,a,b\n2020-01-02,1,2\n2020-01-03,1.5,\n2020-01-06,2,3\n2020-01-07,2.5,3.5\n";
        let s = read_prices(text.as_bytes(), "a", "b").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.x, vec![1.0, 2.0, 2.5]);
    }

    #[test]
    fn sorts_by_date() {
        let text = "date,a,b\n2020-01-06,3,3\n2020-01-02,1,1\n2020-01-03,2,2\n";
        let s = read_prices(text.as_bytes(), "a", "b").unwrap();
        assert_eq!(s.x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn errors() {
        let dup = "date,a,b\n2020-01-02,1,2\n2020-01-03,1,2\n2020-01-02,2,3\n";
        let err = read_prices(dup.as_bytes(), "a", "b").unwrap_err();
        assert!(matches!(&err, Error::DuplicateTimestamp(t) if t == "2020-01-02"));
        let bad = "date,a,b\n2020-01-02,1,x\n";
        assert!(matches!(read_prices(bad.as_bytes(), "a", "b"), Err(Error::BadNumber { line: 2, .. })));
        let stamp = "date,a,b\n02/01/2020,1,2\n";
        assert!(matches!(read_prices(stamp.as_bytes(), "a", "b"), Err(Error::BadTimestamp { .. })));
        let short = "date,a,b\n2020-01-02,1,2\n2020-01-03,1,2\n";
        assert!(matches!(read_prices(short.as_bytes(), "a", "b"), Err(Error::TooFewObservations { .. })));
        assert!(matches!(read_prices(short.as_bytes(), "a", "c"), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn returns() {
        let d = |k| NaiveDate::from_ymd_opt(2020, 1, k).unwrap();
        let s = AlignedSeries {
            timestamps: vec![d(1), d(2), d(3)],
            x: vec![1.0, std::f64::consts::E, std::f64::consts::E],
            y: vec![1.0, 2.0, 4.0],
        };
        let r = log_returns(&s).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.x[1], 0.0);
        assert!((r.y[0] - 2f64.ln()).abs() < 1e-15 && (r.y[1] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(r.timestamps, vec![d(2), d(3)]);
        let neg = AlignedSeries { y: vec![1.0, 0.0, 1.0], ..s };
        assert!(matches!(log_returns(&neg), Err(Error::NonPositivePrice { .. })));
    }

    #[test]
    fn inner_join() {
        let d = |k| NaiveDate::from_ymd_opt(2020, 1, k).unwrap();
        let a = Series {
            timestamps: vec![d(1), d(2), d(3), d(5)],
            values: vec![1.0, 2.0, 3.0, 5.0],
        };
        let b = Series {
            timestamps: vec![d(2), d(3), d(4), d(5)],
            values: vec![20.0, 30.0, 40.0, 50.0],
        };
        let s = align(&a, &b).unwrap();
        assert_eq!(s.timestamps, vec![d(2), d(3), d(5)]);
        assert_eq!(s.y, vec![20.0, 30.0, 50.0]);
    }
}
