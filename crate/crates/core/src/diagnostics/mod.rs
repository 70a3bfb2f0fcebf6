//! Audits of the properties that characterize MICK and MICS.

mod constancy;
mod hessian;
mod stationarity;
mod tp2;

pub use constancy::{ratio_constancy, RatioAudit, WindowRecord};
pub use hessian::{hessian_definiteness, DefinitenessReport, HESSIAN_MAX_N};
pub use stationarity::{stationarity_fit, StationarityFit};
pub use tp2::{min_minor_of_order, tp2_check, Tp2Mode, Tp2Report, TP2_TOLERANCE};

/// λ below this value guarantees a unique stationary point.
pub const UNIQUENESS_THRESHOLD: f64 = 2.0;
