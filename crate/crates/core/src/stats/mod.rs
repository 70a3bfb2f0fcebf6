//! Sampling, empirical rank statistics and tail dependence.

mod empirical;
mod pseudo;
mod sample;

pub use empirical::{
    empirical_checkerboard, empirical_rho, empirical_tau, model_tail_dependence, summarize, tail_dependence,
    DependenceSummary,
};
pub use pseudo::{average_ranks, PseudoObservations, RankConvention};
pub use sample::sample;
