//! Exact and Monte Carlo analysis of the block-merge shuffling process.
//!
//! Start from a uniformly random permutation of `[n]`, merge every maximal run
//! of consecutive integers in adjacent positions into its first element,
//! relabel, and repeat on the smaller permutation. `X_n` counts the
//! permutations needed to reach a single element.

pub mod error;
pub mod exact_core;
pub mod distribution;
pub mod recurrence;
pub mod simulator;

pub use error::{Error, Result};
pub use exact_core::{BigPrecision, ExactRational, Mode, Number};
