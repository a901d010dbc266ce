use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use super::bell::bell_stirling;
use super::memo;
use super::number::{BigPrecision, ExactRational};
use super::polynomial::RationalPolynomial;
use super::prob_row::{prob_row, s_penultimate};
use super::sequences::a_nk_row;
use crate::error::{Error, Result};

/// Both sides of the `(n-k)^ℓ` moment identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NkMoment {
    pub lhs: ExactRational,
    pub rhs: ExactRational,
}

impl NkMoment {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `Σ_k q_nk (n-k)^ℓ` against `B_ℓ - (B_{ℓ+1} - B_ℓ)/n`.
///
/// The two sides agree when `n ≥ ℓ`. The Stirling expansion
/// `Σ_{m ≤ min(n-1, ℓ)} (n-m)/n · S(ℓ, m)` must equal the left side for every
/// `n`; a mismatch is reported as an error.
pub fn nk_moment_identity(n: usize, ell: usize) -> Result<NkMoment> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let row = a_nk_row(n);
    let mut total = Integer::new();
    for (i, count) in row.iter().enumerate() {
        let gap = Integer::from(n - 1 - i);
        total += count * gap.pow(ell as u32);
    }
    let lhs = ExactRational::new(total, memo::factorial(n));

    let table = bell_stirling(ell + 1);
    let b = |l: usize| ExactRational::from(&table.bell[l]);
    let rhs = b(ell) - (b(ell + 1) - b(ell)) / ExactRational::from(n as i64);

    let mut stirling = Integer::new();
    for m in 0..=ell.min(n - 1) {
        stirling += Integer::from(table.stirling(ell, m) * (n - m) as u64);
    }
    let stirling = ExactRational::new(stirling, n as u64);
    if stirling != lhs {
        return Err(Error::Consistency(format!(
            "Stirling form {stirling} != {lhs} at n={n}, l={ell}"
        )));
    }
    Ok(NkMoment { lhs, rhs })
}

/// Compares `Σ_k q_nk z^k` with `Σ_m (n-m)/(n·m!) z^{n-m} (1-z)^m`.
pub fn z_polynomial_identity(n: usize) -> bool {
    let row = prob_row(n);
    let mut lhs = vec![ExactRational::zero()];
    lhs.extend(row.probs);
    let lhs = RationalPolynomial::new(lhs);

    let one = ExactRational::one();
    let mut rhs = RationalPolynomial::zero();
    for m in 0..n {
        let c = ExactRational::new((n - m) as u64, memo::factorial(m) * n as u64);
        let shift = RationalPolynomial::monomial(c, n - m);
        let tail = RationalPolynomial::binomial_power(&one, &-&one, m);
        rhs = &rhs + &(&shift * &tail);
    }
    lhs == rhs
}

/// Compares `Σ_t S_n(t) z^t` with `z^n + Σ_{m≥1} (n-m)/(n·m!) z^{n-m} (1-z)^{m-1}`.
pub fn s_polynomial_identity(n: usize) -> bool {
    let row = prob_row(n);
    let mut lhs = vec![ExactRational::zero()];
    lhs.extend(row.prefix);
    let lhs = RationalPolynomial::new(lhs);

    let one = ExactRational::one();
    let mut rhs = RationalPolynomial::monomial(one.clone(), n);
    for m in 1..n {
        let c = ExactRational::new((n - m) as u64, memo::factorial(m) * n as u64);
        let shift = RationalPolynomial::monomial(c, n - m);
        let tail = RationalPolynomial::binomial_power(&one, &-&one, m - 1);
        rhs = &rhs + &(&shift * &tail);
    }
    lhs == rhs
}

/// Power sums `Σ_t S_n(t) t^{-j}` for `j = 0, 1, 2` and their closed forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SSums {
    pub n: usize,
    pub sum0: ExactRational,
    pub sum_inv: ExactRational,
    pub sum_inv2: ExactRational,
    pub rhs0: ExactRational,
    pub rhs_inv: ExactRational,
    pub rhs_inv2: ExactRational,
}

impl SSums {
    pub fn holds(&self) -> bool {
        self.sum0 == self.rhs0 && self.sum_inv == self.rhs_inv && self.sum_inv2 == self.rhs_inv2
    }
}

/// `H_0..=H_n` as exact rationals.
pub fn harmonic_numbers(n: usize) -> Vec<ExactRational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut h = ExactRational::zero();
    out.push(h.clone());
    for k in 1..=n {
        h += ExactRational::new(1, k as u64);
        out.push(h.clone());
    }
    out
}

/// Evaluates both sides of the three power-sum identities; errors if any differ.
pub fn s_sum_identities(n: usize) -> Result<SSums> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let row = prob_row(n);
    let mut sum0 = ExactRational::zero();
    let mut sum_inv = ExactRational::zero();
    let mut sum_inv2 = ExactRational::zero();
    for (i, s) in row.prefix.iter().enumerate() {
        let t = (i + 1) as u64;
        sum0 += s;
        sum_inv += s * &ExactRational::new(1, t);
        sum_inv2 += s * &ExactRational::new(1, t * t);
    }

    let nn = n as u64;
    let fact_n = memo::factorial(n);
    let h = harmonic_numbers(n);
    let rhs0 = ExactRational::from(2) - ExactRational::new(1, nn);
    let mut rhs_inv = ExactRational::new(1, nn);
    let mut rhs_inv2 = ExactRational::new(1, nn * nn);
    for m in 1..n {
        let term = ExactRational::new(memo::factorial(n - m), Integer::from(&fact_n * m as u64));
        rhs_inv += &term;
        rhs_inv2 += ExactRational::new(memo::factorial(n - m - 1), Integer::from(&fact_n * nn));
        rhs_inv2 += term * (&h[n] - &h[n - m]);
    }

    let sums = SSums { n, sum0, sum_inv, sum_inv2, rhs0, rhs_inv, rhs_inv2 };
    if sums.holds() {
        Ok(sums)
    } else {
        Err(Error::Consistency(format!("S_n power sums disagree at n={n}")))
    }
}

/// `Σ_t S_n(t) t^ℓ`.
pub fn s_weighted_power_sum(n: usize, ell: u32) -> ExactRational {
    let row = prob_row(n);
    row.prefix
        .iter()
        .enumerate()
        .map(|(i, s)| s * &ExactRational::from(Integer::from(i + 1).pow(ell)))
        .sum()
}

/// `Σ_k q_nk (n-k)^ℓ k^s`, exact when `s` is a nonnegative integer and
/// otherwise evaluated at `bits` of precision with `k^s = exp(s log k)`.
pub fn q_weighted_sum(n: usize, ell: u32, s: f64, bits: u32) -> BigPrecision {
    let row = a_nk_row(n);
    let fact = memo::factorial(n);
    if s >= 0.0 && s.fract() == 0.0 && s <= u32::MAX as f64 {
        let s = s as u32;
        let mut total = Integer::new();
        for (i, count) in row.iter().enumerate() {
            let k = i + 1;
            total += count * Integer::from(n - k).pow(ell) * Integer::from(k).pow(s);
        }
        return BigPrecision::from_ratio(&total, &fact, bits);
    }
    let work = bits + 32;
    let exponent = Float::with_val(work, s);
    let mut total = Float::with_val(work, 0);
    for (i, count) in row.iter().enumerate() {
        let k = i + 1;
        let weight = Integer::from(count * Integer::from(n - k).pow(ell));
        if weight == 0 {
            continue;
        }
        let ks = (Float::with_val(work, k).ln() * &exponent).exp();
        total += Float::with_val(work, &weight) * ks;
    }
    total /= Float::with_val(work, &fact);
    BigPrecision::from_float(Float::with_val(bits, total))
}

/// `63/100 < S_n(n-1) < 64/100`, decided in integers.
pub fn s_penultimate_bound_holds(n: usize) -> bool {
    let (num, den) = s_penultimate(n);
    let scaled = Integer::from(&num * 100u32);
    scaled > Integer::from(&den * 63u32) && scaled < Integer::from(&den * 64u32)
}

/// `|S_n(n-1) - (1 - 1/e)|` at `bits` of precision.
pub fn s_penultimate_gap(n: usize, bits: u32) -> Float {
    let (num, den) = s_penultimate(n);
    let s = super::number::ratio_float(&num, &den, bits);
    let limit = Float::with_val(bits, 1) - Float::with_val(bits, -1).exp();
    Float::with_val(bits, s - limit).abs()
}

/// `Σ_{m=2}^{n-1} (n-m)!/(m·n!)`, which lies in `(0.49/n², 0.51/n²)` for large `n`.
pub fn b_prime_sum(n: usize) -> ExactRational {
    let fact = memo::factorial(n);
    (2..n)
        .map(|m| ExactRational::new(memo::factorial(n - m), Integer::from(&fact * m as u64)))
        .sum()
}

/// First `terms` coefficients of `exp(-x)/(1-x)^2`.
pub fn egf_coefficients(terms: usize) -> Vec<ExactRational> {
    (0..terms)
        .map(|n| {
            (0..=n)
                .map(|i| {
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    ExactRational::new(sign * (n - i + 1) as i64, memo::factorial(i))
                })
                .sum()
        })
        .collect()
}
