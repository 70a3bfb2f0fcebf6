use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("entry ({row}, {col}) is negative: {value:e}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("{axis} {index} sums to {sum}, expected {expected} (tolerance {tolerance:e})")]
    MarginViolation {
        axis: &'static str,
        index: usize,
        sum: f64,
        expected: f64,
        tolerance: f64,
    },

    #[error("entry ({row}, {col}) is zero")]
    ZeroEntry { row: usize, col: usize },

    #[error("window ({row}, {col}) is outside the {n}x{n} grid")]
    WindowOutOfRange { row: usize, col: usize, n: usize },

    #[error("no admissible root for window a={a:e} b={b:e} c={c:e} d={d:e} at ratio {ratio}")]
    NoAdmissibleRoot {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        ratio: f64,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("target {target} is outside the achievable range (|target| < {bound})")]
    InfeasibleTarget { target: f64, bound: f64 },

    #[error("could not bracket target {target}: measure stayed at {reached} up to ratio {ratio}")]
    BracketExpansion { target: f64, reached: f64, ratio: f64 },

    #[error("no grid point has tau within [{lo}, {hi}]")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("{side} conditioning set is empty at {percent}%")]
    EmptyConditioningSet { side: &'static str, percent: f64 },

    #[error("coordinate vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("observation {index} is outside (0, 1)")]
    OutOfUnitInterval { index: usize },

    #[error("proportional scaling did not converge in {iterations} iterations (deviation {deviation:e})")]
    ScalingFailed { iterations: usize, deviation: f64 },

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("line {line}: cannot parse `{value}` as a number")]
    BadNumber { line: usize, value: String },

    #[error("line {line}: cannot parse timestamp `{value}`")]
    BadTimestamp { line: usize, value: String },

    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),

    #[error("price {value} at {timestamp} is not positive")]
    NonPositivePrice { timestamp: String, value: f64 },

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }

    /// True for failures of an iterative method to reach its tolerance.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::ScalingFailed { .. } | Error::BracketExpansion { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
