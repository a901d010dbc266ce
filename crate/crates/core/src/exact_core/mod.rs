//! Exact arithmetic, the block-count law and its closed-form identities.

pub mod bell;
pub mod identities;
pub mod memo;
pub mod number;
pub mod polynomial;
pub mod prob_row;
pub mod sequences;
pub mod suite;

pub use bell::{bell_number, bell_stirling, BellStirlingTable};
pub use identities::{
    nk_moment_identity, q_weighted_sum, s_polynomial_identity, s_sum_identities,
    s_weighted_power_sum, z_polynomial_identity, NkMoment, SSums,
};
pub use number::{BigPrecision, ExactRational, Mode, Number};
pub use polynomial::RationalPolynomial;
pub use prob_row::{block_count, prob_row, ProbRow};
pub use sequences::{a_floor_check, a_nk_row, a_sequence};
