use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use super::float::float_row;
use super::moments::MeanValues;
use crate::error::{Error, Result};
use crate::exact_core::bell::bell_stirling;
use crate::exact_core::memo;
use crate::exact_core::number::{BigPrecision, ExactRational, Number};
use crate::exact_core::sequences::a_nk_row;

/// Which weighted sum of mean gaps to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightedVariant {
    /// `Σ q_nk (n-k)^{ℓ1} (μ_n-μ_k)^{ℓ2}`, target `B_{ℓ1+ℓ2}`.
    Plain,
    /// The plain sum with an extra `1/k`, target `0`.
    KInverse,
    /// `Σ q_nk k^{ℓ1} (μ_n-μ_k)^{ℓ2}`, target `B_{ℓ2} n^{ℓ1}`.
    KPower,
    /// `Σ q_nk k^L (1+μ_k-μ_n)^M` with `M = ℓ2`, target `(Σ_m C(M,m)(-1)^m B_m) n^L`.
    ShiftPower,
    /// `Σ q_nk k^L (1+μ_k-μ_n)`, target `L n^{L-1}` (exactly `0` when `L = 0`).
    ShiftLinear,
}

impl WeightedVariant {
    pub const ALL: [WeightedVariant; 5] = [
        WeightedVariant::Plain,
        WeightedVariant::KInverse,
        WeightedVariant::KPower,
        WeightedVariant::ShiftPower,
        WeightedVariant::ShiftLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightedVariant::Plain => "plain",
            WeightedVariant::KInverse => "k1",
            WeightedVariant::KPower => "kpow",
            WeightedVariant::ShiftPower => "lm",
            WeightedVariant::ShiftLinear => "l1",
        }
    }
}

impl fmt::Display for WeightedVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightedVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightedVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant {s:?}")))
    }
}

/// Exponents of `(n-k)^a k^b (μ_n-μ_k)^c (1+μ_k-μ_n)^d / k^e`.
#[derive(Clone, Copy, Debug)]
struct Weight {
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    inv_k: bool,
}

fn weighted_sum(means: &MeanValues, n: usize, w: Weight) -> Result<Number> {
    if n == 0 || n > means.n_max() {
        return Err(Error::InvalidInput(format!("n={n} outside the mean table")));
    }
    let row = a_nk_row(n);
    if let Some(s) = means.scaled() {
        let g = &s.g[n];
        let gaps = s.gaps(n);
        let lcm = if w.inv_k {
            (2..=n as u64).fold(Integer::from(1), |acc, k| acc.lcm_u(k as u32))
        } else {
            Integer::from(1)
        };
        let mut total = Integer::new();
        for k in 1..=n {
            let mut term = Integer::from(&row[k - 1] * Integer::from(n - k).pow(w.a));
            term *= Integer::from(k).pow(w.b);
            if w.c > 0 {
                term *= Integer::from((&gaps[k]).pow(w.c));
            }
            if w.d > 0 {
                term *= Integer::from(g - &gaps[k]).pow(w.d);
            }
            if w.inv_k {
                term *= Integer::from(lcm.div_exact_u_ref(k as u32));
            }
            total += term;
        }
        let den = Integer::from(g.pow(w.c + w.d)) * memo::factorial(n) * lcm;
        return Ok(Number::Exact(ExactRational::new(total, den)));
    }
    let bits = means.mode().bits().expect("float mode");
    let (q, _) = float_row(n, bits);
    let mu_n = means.mu_float(n, bits);
    let mut total = Float::new(bits);
    for k in 1..=n {
        let gap = Float::with_val(bits, &mu_n - means.mu_float(k, bits));
        let mut term = Float::with_val(bits, &q[k - 1]);
        term *= Float::with_val(bits, n - k).pow(w.a);
        term *= Float::with_val(bits, k).pow(w.b);
        term *= Float::with_val(bits, (&gap).pow(w.c));
        term *= (Float::with_val(bits, 1) - gap).pow(w.d);
        if w.inv_k {
            term /= k as u32;
        }
        total += term;
    }
    Ok(Number::Float(BigPrecision::from_float(total)))
}

/// `Σ_k q_nk (n-k)^{ℓ1} (μ_n - μ_k)^{ℓ2}`.
pub fn weighted_moment_sum(means: &MeanValues, n: usize, ell1: u32, ell2: u32) -> Result<Number> {
    weighted_sum(means, n, Weight { a: ell1, b: 0, c: ell2, d: 0, inv_k: false })
}

/// A weighted sum with its predicted leading behaviour.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedSum {
    pub variant: String,
    pub n: usize,
    pub value: Number,
    pub target: ExactRational,
    pub scaled_err: f64,
}

/// Evaluates one of the [`WeightedVariant`] sums with its target and scaled error.
///
/// `big_l` is the `k`-exponent of the shifted variants; the others ignore it.
pub fn weighted_moment_sum_k(
    means: &MeanValues,
    n: usize,
    ell1: u32,
    ell2: u32,
    big_l: u32,
    variant: WeightedVariant,
) -> Result<WeightedSum> {
    let nn = ExactRational::from(n as i64);
    let bell = |l: usize| ExactRational::from(&bell_stirling(l).bell[l]);
    let (weight, target, scale) = match variant {
        WeightedVariant::Plain => (
            Weight { a: ell1, b: 0, c: ell2, d: 0, inv_k: false },
            bell((ell1 + ell2) as usize),
            nn.recip(),
        ),
        WeightedVariant::KInverse => (
            Weight { a: ell1, b: 0, c: ell2, d: 0, inv_k: true },
            ExactRational::zero(),
            nn.recip(),
        ),
        WeightedVariant::KPower => (
            Weight { a: 0, b: ell1, c: ell2, d: 0, inv_k: false },
            bell(ell2 as usize) * nn.pow(ell1 as i32),
            nn.pow(ell1 as i32 - 1),
        ),
        WeightedVariant::ShiftPower => {
            if ell2 == 0 {
                return Err(Error::InvalidInput("the shifted power needs M >= 1".into()));
            }
            let table = bell_stirling(ell2 as usize);
            let mut coeff = ExactRational::zero();
            let mut binom = Integer::from(1);
            for m in 0..=ell2 {
                if m > 0 {
                    binom *= ell2 - m + 1;
                    binom.div_exact_u_mut(m);
                }
                let term = ExactRational::from(Integer::from(&binom * &table.bell[m as usize]));
                if m % 2 == 0 {
                    coeff += term;
                } else {
                    coeff -= term;
                }
            }
            (
                Weight { a: 0, b: big_l, c: 0, d: ell2, inv_k: false },
                coeff * nn.pow(big_l as i32),
                nn.pow(big_l as i32 - 1),
            )
        }
        WeightedVariant::ShiftLinear => {
            let target = if big_l == 0 {
                ExactRational::zero()
            } else {
                ExactRational::from(big_l as i64) * nn.pow(big_l as i32 - 1)
            };
            (
                Weight { a: 0, b: big_l, c: 0, d: 1, inv_k: false },
                target,
                nn.pow(big_l as i32 - 2),
            )
        }
    };
    let value = weighted_sum(means, n, weight)?;
    let bits = means.mode().bits().unwrap_or(256);
    let err = value.to_float(bits) - Float::with_val(bits, target.as_rational());
    let scaled_err = (err.abs() / Float::with_val(bits, scale.as_rational())).to_f64();
    Ok(WeightedSum { variant: variant.name().to_string(), n, value, target, scaled_err })
}

/// `Σ_k q_nk (μ_n - μ_k) = 1`, decided in integers.
pub fn bell_hit_identity(means: &MeanValues, n: usize) -> Result<bool> {
    let s = means
        .scaled()
        .ok_or_else(|| Error::InvalidInput("the exact identity needs exact means".into()))?;
    if n < 2 || n > means.n_max() {
        return Err(Error::InvalidInput(format!("n={n} outside 2..={}", means.n_max())));
    }
    let row = a_nk_row(n);
    let gaps = s.gaps(n);
    let mut total = Integer::new();
    for k in 1..=n {
        total += &row[k - 1] * &gaps[k];
    }
    Ok(total == Integer::from(&s.g[n] * memo::factorial(n)))
}

/// The plain weighted sum over a range of `n` with its scaled error series.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedMomentReport {
    pub ell1: u32,
    pub ell2: u32,
    pub n_lo: usize,
    pub n_hi: usize,
    pub values: Vec<Number>,
    pub target: ExactRational,
    /// `n |value - target|`.
    pub scaled_err: Vec<f64>,
}

impl WeightedMomentReport {
    pub fn sup_scaled_err(&self) -> f64 {
        self.scaled_err.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn weighted_moment_report(
    means: &MeanValues,
    ell1: u32,
    ell2: u32,
    n_lo: usize,
    n_hi: usize,
) -> Result<WeightedMomentReport> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidInput(format!("bad range {n_lo}..={n_hi}")));
    }
    let mut values = Vec::new();
    let mut scaled_err = Vec::new();
    let mut target = ExactRational::zero();
    for n in n_lo..=n_hi {
        let w = weighted_moment_sum_k(means, n, ell1, ell2, 0, WeightedVariant::Plain)?;
        values.push(w.value);
        scaled_err.push(w.scaled_err);
        target = w.target;
    }
    Ok(WeightedMomentReport { ell1, ell2, n_lo, n_hi, values, target, scaled_err })
}
