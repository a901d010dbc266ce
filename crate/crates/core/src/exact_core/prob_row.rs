use rug::Integer;
use serde::Serialize;

use super::memo;
use super::number::ExactRational;
use super::sequences::a_nk_row;
use crate::error::{Error, Result};

/// The law of the block count of a uniform permutation of `[n]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbRow {
    pub n: usize,
    /// `probs[k - 1] = A(n, k) / n!`.
    pub probs: Vec<ExactRational>,
    /// `prefix[t - 1] = S_n(t)`.
    pub prefix: Vec<ExactRational>,
}

impl ProbRow {
    /// `P(Y_n = k)` for `1 ≤ k ≤ n`.
    pub fn prob(&self, k: usize) -> &ExactRational {
        &self.probs[k - 1]
    }

    /// `S_n(t)` for `1 ≤ t ≤ n`.
    pub fn s(&self, t: usize) -> &ExactRational {
        &self.prefix[t - 1]
    }

    /// Self-loop probability `A(n-1)/n!`.
    pub fn stay(&self) -> &ExactRational {
        self.prob(self.n)
    }
}

/// Builds `ProbRow(n)` and checks its normalization.
///
/// # Panics
/// Panics if `n == 0` or if the row fails to sum to one.
pub fn prob_row(n: usize) -> ProbRow {
    assert!(n >= 1, "prob_row needs n >= 1");
    let fact = memo::factorial(n);
    let counts = a_nk_row(n);
    let probs: Vec<ExactRational> =
        counts.iter().map(|c| ExactRational::from_ratio(c, &fact)).collect();
    let mut prefix = Vec::with_capacity(n);
    let mut acc = ExactRational::zero();
    for p in &probs {
        acc += p;
        prefix.push(acc.clone());
    }
    assert!(acc == ExactRational::one(), "ProbRow({n}) sums to {acc}");
    ProbRow { n, probs, prefix }
}

/// `S_n(n-1) = 1 - A(n-1)/n!`, as the integer pair `(n! - A(n-1), n!)`.
pub fn s_penultimate(n: usize) -> (Integer, Integer) {
    assert!(n >= 2);
    let fact = memo::factorial(n);
    let stay = memo::a_number(n - 1);
    (Integer::from(&fact - &stay), fact)
}

/// Number of maximal blocks `(i, i+1, ..., j)` occupying adjacent positions.
pub fn block_count(perm: &[u32]) -> Result<usize> {
    validate_permutation(perm)?;
    Ok(block_count_unchecked(perm))
}

/// [`block_count`] without validating the input.
pub fn block_count_unchecked(perm: &[u32]) -> usize {
    perm.len() - perm.windows(2).filter(|w| w[1] == w[0].wrapping_add(1)).count()
}

pub fn validate_permutation(perm: &[u32]) -> Result<()> {
    let s = perm.len();
    let mut seen = vec![false; s + 1];
    for &v in perm {
        let v = v as usize;
        if v == 0 || v > s {
            return Err(Error::InvalidPermutation { len: s, reason: format!("{v} out of range") });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidPermutation { len: s, reason: format!("{v} repeated") });
        }
    }
    Ok(())
}
