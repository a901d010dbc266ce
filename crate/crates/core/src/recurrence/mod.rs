//! Means, raw and central moments of `X_n`, the generic linear recurrence,
//! and weighted sums of mean gaps.

pub mod diagnostics;
mod exact;
pub(crate) use exact::binomials as exact_binomials;
mod float;
pub mod generic;
pub mod moments;
pub mod weighted;

pub use diagnostics::{central_error_terms, eps_mean_diagnostics, mu_gap_bounds, rao_bound_failures, EpsReport, ErrorTermRow};
pub use moments::{central_moments, main_term, mean_values, raw_moments, MeanValues, MomentTable};
pub use weighted::{
    bell_hit_identity, weighted_moment_report, weighted_moment_sum, weighted_moment_sum_k,
    WeightedMomentReport, WeightedSum, WeightedVariant,
};
pub use generic::{generic_recurrence, GenericRecurrenceRun, GenericRow};
