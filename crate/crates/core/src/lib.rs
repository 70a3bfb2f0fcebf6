//! Minimum-information checkerboard copulas under a fixed Kendall's tau
//! (MICK) or Spearman's rho (MICS).
//!
//! A checkerboard copula on an n×n grid is a nonnegative matrix with every
//! row and column summing to 1/n. The [`solver`] finds the member of least
//! information Σ p log p with a prescribed rank correlation, [`diagnostics`]
//! audits the properties that characterize it, and [`stats`] with
//! [`ingest`] carry it to bivariate data.

pub mod basis;
pub mod copula;
pub mod diagnostics;
pub mod error;
pub mod ingest;
pub mod measures;
pub mod odds;
pub mod solver;
pub mod stats;
pub mod structure;

pub use basis::{mass_transfer, to_copula, to_coordinates, BasisCoordinates};
pub use copula::CheckerboardCopula;
pub use error::{Error, Result};
pub use measures::{information, kendall_tau, spearman_rho};
pub use odds::{local_odds, LocalOdds, WindowKind};
pub use solver::{
    calibrate, reflect_columns, solve_mick, solve_mics, Acceleration, Family, Measure, SolveReport, SolverConfig,
    SweepOrder,
};
pub use structure::StructuralMatrices;
