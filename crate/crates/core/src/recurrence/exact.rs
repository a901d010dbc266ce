//! Integer dynamic programs behind exact mode.
//!
//! With `Δ_k = k! - A(k-1)` and `G_n = Δ_2 ⋯ Δ_n`, every raw and central
//! moment of order `j` of `X_n` is an integer multiple of `G_n^{-j}`.
//! Keeping numerators over that fixed denominator replaces rational
//! arithmetic (dominated by gcds) with integer products and Horner sums.

use rug::Integer;

use crate::error::{Error, Result};
use crate::exact_core::memo;
use crate::exact_core::sequences::a_nk_row;

/// `Δ_n` and `G_n` for `0 ≤ n ≤ n_max` (`Δ_0 = Δ_1 = G_0 = G_1 = 1`).
#[derive(Clone, Debug)]
pub(crate) struct Basis {
    pub delta: Vec<Integer>,
    pub g: Vec<Integer>,
}

impl Basis {
    pub fn new(n_max: usize) -> Self {
        memo::with_tables(n_max, |fact, a| {
            let mut delta = vec![Integer::from(1); n_max + 1];
            let mut g = vec![Integer::from(1); n_max + 1];
            for n in 2..=n_max {
                delta[n] = Integer::from(&fact[n] - &a[n - 1]);
                g[n] = Integer::from(&g[n - 1] * &delta[n]);
            }
            Basis { delta, g }
        })
    }

    /// `Δ_k^j` for `0 ≤ j ≤ order`.
    pub fn delta_powers(&self, k: usize, order: usize) -> Vec<Integer> {
        powers(&self.delta[k], order)
    }

    /// `G_n / G_k` for `1 ≤ k ≤ n`, indexed by `k`.
    pub fn ratios(&self, n: usize) -> Vec<Integer> {
        let mut out = vec![Integer::new(); n + 1];
        out[n] = Integer::from(1);
        for k in (1..n).rev() {
            out[k] = Integer::from(&out[k + 1] * &self.delta[k + 1]);
        }
        out
    }
}

pub(crate) fn powers(x: &Integer, order: usize) -> Vec<Integer> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(Integer::from(1));
    for j in 1..=order {
        out.push(Integer::from(&out[j - 1] * x));
    }
    out
}

pub(crate) fn binomials(order: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; order + 1]; order + 1];
    for j in 0..=order {
        c[j][0] = 1;
        for i in 1..=j {
            c[j][i] = c[j - 1][i - 1] + if i < j { c[j - 1][i] } else { 0 };
        }
    }
    c
}

/// Raw-moment numerators: `E[X_n^j] = raw[n][j] / G_n^j`.
#[derive(Clone, Debug)]
pub(crate) struct ExactRaw {
    pub basis: Basis,
    pub order: usize,
    /// Indexed `[n][j]` for `1 ≤ n ≤ n_max`; row 0 is empty.
    pub raw: Vec<Vec<Integer>>,
}

pub(crate) fn raw_moments(n_max: usize, order: usize) -> ExactRaw {
    let basis = Basis::new(n_max);
    let binom = binomials(order);
    let dpow: Vec<Vec<Integer>> = (0..=n_max).map(|k| basis.delta_powers(k, order)).collect();

    let mut raw: Vec<Vec<Integer>> = vec![Vec::new(); n_max + 1];
    // shifted[k][j]: numerator of E[(1 + X_k)^j] over G_k^j.
    let mut shifted: Vec<Vec<Integer>> = vec![Vec::new(); n_max + 1];
    if n_max >= 1 {
        let mut r1 = vec![Integer::new(); order + 1];
        r1[0] = Integer::from(1);
        raw[1] = r1;
        shifted[1] = vec![Integer::from(1); order + 1];
    }
    for n in 2..=n_max {
        let row = a_nk_row(n);
        let gpow = powers(&basis.g[n], order);
        let mut rn = vec![Integer::new(); order + 1];
        rn[0] = Integer::from(1);
        for j in 1..=order {
            let mut acc = Integer::new();
            for k in 1..n {
                acc *= &dpow[k][j];
                acc += &row[k - 1] * &shifted[k][j];
            }
            acc *= &dpow[n][j];
            let mut own = Integer::new();
            for i in 0..j {
                own += Integer::from(&rn[i] * &gpow[j - i]) * binom[j][i];
            }
            acc += own * &row[n - 1];
            rn[j] = exact_div(acc, &basis.delta[n], || format!("raw moment n={n}, j={j}"))
                .expect("Δ_n divides the raw-moment numerator");
        }
        let mut sn = vec![Integer::new(); order + 1];
        for j in 0..=order {
            for i in 0..=j {
                sn[j] += Integer::from(&rn[i] * &gpow[j - i]) * binom[j][i];
            }
        }
        raw[n] = rn;
        shifted[n] = sn;
    }
    ExactRaw { basis, order, raw }
}

fn exact_div(x: Integer, d: &Integer, what: impl FnOnce() -> String) -> Result<Integer> {
    if !x.is_divisible(d) {
        return Err(Error::Consistency(format!("non-integral numerator in {}", what())));
    }
    Ok(x.div_exact(d))
}

/// Central moments by the binomial transform of the raw moments:
/// `E[(X_n - μ_n)^m] = out[n][m] / G_n^m`.
pub(crate) fn central_binomial(raw: &ExactRaw) -> Vec<Vec<Integer>> {
    let order = raw.order;
    let binom = binomials(order);
    let mut out = vec![Vec::new(); raw.raw.len()];
    for n in 1..raw.raw.len() {
        let r = &raw.raw[n];
        let neg_mean = if order >= 1 { Integer::from(-&r[1]) } else { Integer::new() };
        let mpow = powers(&neg_mean, order);
        let mut row = vec![Integer::new(); order + 1];
        for m in 0..=order {
            for i in 0..=m {
                row[m] += Integer::from(&r[i] * &mpow[m - i]) * binom[m][i];
            }
        }
        out[n] = row;
    }
    out
}

/// Output of the direct central-moment recurrence.
pub(crate) struct DirectCentral {
    /// `E[(X_n - μ_n)^m] = central[n][m] / G_n^m`.
    pub central: Vec<Vec<Integer>>,
    /// `Σ_ℓ C(m,ℓ) I_ℓ^{(m)}(n) = forcing[n][m] / (n! G_n^m)`.
    pub forcing: Vec<Vec<Integer>>,
}

/// Central moments straight from the recurrence
/// `(1 - q_nn) C_n^m = Σ_{k<n} q_nk C_k^m + Σ_{ℓ=1}^m C(m,ℓ) Σ_{k≤n} q_nk C_k^{m-ℓ} (1 + μ_k - μ_n)^ℓ`,
/// using only the means from `raw`.
pub(crate) fn central_direct(raw: &ExactRaw) -> Result<DirectCentral> {
    let order = raw.order;
    let n_max = raw.raw.len() - 1;
    let basis = &raw.basis;
    let binom = binomials(order);
    let dpow: Vec<Vec<Integer>> = (0..=n_max).map(|k| basis.delta_powers(k, order)).collect();
    let mean = |k: usize| -> &Integer { &raw.raw[k][1] };

    let mut central = vec![Vec::new(); n_max + 1];
    let mut forcing = vec![Vec::new(); n_max + 1];
    if n_max >= 1 {
        let mut c1 = vec![Integer::new(); order + 1];
        c1[0] = Integer::from(1);
        central[1] = c1;
        forcing[1] = vec![Integer::new(); order + 1];
    }
    for n in 2..=n_max {
        let row = a_nk_row(n);
        let ratio = basis.ratios(n);
        // e_k = (1 + μ_k - μ_n) G_n
        let epow: Vec<Vec<Integer>> = (1..=n)
            .map(|k| {
                let e = Integer::from(&basis.g[n] - mean(n)) + Integer::from(mean(k) * &ratio[k]);
                powers(&e, order)
            })
            .collect();
        let mut cn = vec![Integer::new(); order + 1];
        cn[0] = Integer::from(1);
        let mut fn_row = vec![Integer::new(); order + 1];
        for m in 1..=order {
            let mut lower = Integer::new();
            for k in 1..n {
                lower *= &dpow[k][m];
                lower += &row[k - 1] * &central[k][m];
            }
            lower *= &dpow[n][m];

            let mut force = Integer::new();
            for ell in 1..=m {
                let r = m - ell;
                let mut acc = Integer::new();
                for k in 1..=n {
                    acc *= &dpow[k][r];
                    let c = if k == n { &cn[r] } else { &central[k][r] };
                    if c.cmp0() == std::cmp::Ordering::Equal {
                        continue;
                    }
                    acc += Integer::from(&row[k - 1] * c) * &epow[k - 1][ell];
                }
                force += acc * binom[m][ell];
            }
            cn[m] = exact_div(Integer::from(&lower + &force), &basis.delta[n], || {
                format!("central moment n={n}, m={m}")
            })?;
            fn_row[m] = force;
        }
        central[n] = cn;
        forcing[n] = fn_row;
    }
    Ok(DirectCentral { central, forcing })
}
