//! The same recurrences in `rug::Float` arithmetic.

use rug::Float;

use super::exact::binomials;
use crate::error::{Error, Result};
use crate::exact_core::memo;
use crate::exact_core::number::ratio_float;
use crate::exact_core::sequences::a_nk_row;

/// `q_nk` for `k = 1..=n` at index `k - 1`, plus `1 - q_nn`, each correctly rounded.
pub(crate) fn float_row(n: usize, bits: u32) -> (Vec<Float>, Float) {
    let fact = memo::factorial(n);
    let row = a_nk_row(n);
    let q: Vec<Float> = row.iter().map(|c| ratio_float(c, &fact, bits)).collect();
    let leave = ratio_float(&(fact.clone() - &row[n - 1]), &fact, bits);
    (q, leave)
}

pub(crate) struct FloatRaw {
    pub bits: u32,
    pub order: usize,
    pub raw: Vec<Vec<Float>>,
}

pub(crate) fn raw_moments(n_max: usize, order: usize, bits: u32) -> FloatRaw {
    let binom = binomials(order);
    let zero = Float::with_val(bits, 0);
    let one = Float::with_val(bits, 1);
    let mut raw = vec![Vec::new(); n_max + 1];
    let mut shifted = vec![Vec::new(); n_max + 1];
    if n_max >= 1 {
        let mut r1 = vec![zero.clone(); order + 1];
        r1[0] = one.clone();
        raw[1] = r1;
        shifted[1] = vec![one.clone(); order + 1];
    }
    for n in 2..=n_max {
        let (q, leave) = float_row(n, bits);
        let mut rn = vec![zero.clone(); order + 1];
        rn[0] = one.clone();
        for j in 1..=order {
            let mut acc = zero.clone();
            for k in 1..n {
                acc += Float::with_val(bits, &q[k - 1] * &shifted[k][j]);
            }
            let mut own = zero.clone();
            for i in 0..j {
                own += Float::with_val(bits, &rn[i] * binom[j][i]);
            }
            acc += own * &q[n - 1];
            rn[j] = acc / &leave;
        }
        let sn: Vec<Float> = (0..=order)
            .map(|j| {
                let mut s = zero.clone();
                for i in 0..=j {
                    s += Float::with_val(bits, &rn[i] * binom[j][i]);
                }
                s
            })
            .collect();
        raw[n] = rn;
        shifted[n] = sn;
    }
    FloatRaw { bits, order, raw }
}

pub(crate) fn central_binomial(raw: &FloatRaw) -> Vec<Vec<Float>> {
    let bits = raw.bits;
    let order = raw.order;
    let binom = binomials(order);
    raw.raw
        .iter()
        .map(|r| {
            if r.is_empty() {
                return Vec::new();
            }
            let neg_mean = if order >= 1 { Float::with_val(bits, -&r[1]) } else { Float::new(bits) };
            let mut mpow = vec![Float::with_val(bits, 1)];
            for m in 1..=order {
                let next = Float::with_val(bits, &mpow[m - 1] * &neg_mean);
                mpow.push(next);
            }
            (0..=order)
                .map(|m| {
                    let mut s = Float::new(bits);
                    for i in 0..=m {
                        s += Float::with_val(bits, &r[i] * &mpow[m - i]) * binom[m][i];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub(crate) struct FloatDirect {
    pub central: Vec<Vec<Float>>,
    /// `Σ_ℓ C(m,ℓ) I_ℓ^{(m)}(n)`.
    pub forcing: Vec<Vec<Float>>,
}

pub(crate) fn central_direct(raw: &FloatRaw) -> FloatDirect {
    let bits = raw.bits;
    let order = raw.order;
    let n_max = raw.raw.len() - 1;
    let binom = binomials(order);
    let mut central: Vec<Vec<Float>> = vec![Vec::new(); n_max + 1];
    let mut forcing: Vec<Vec<Float>> = vec![Vec::new(); n_max + 1];
    if n_max >= 1 {
        let mut c1 = vec![Float::new(bits); order + 1];
        c1[0] = Float::with_val(bits, 1);
        central[1] = c1;
        forcing[1] = vec![Float::new(bits); order + 1];
    }
    for n in 2..=n_max {
        let (q, leave) = float_row(n, bits);
        let mu_n = &raw.raw[n][1];
        let dpow: Vec<Vec<Float>> = (1..=n)
            .map(|k| {
                let d = Float::with_val(bits, 1) + Float::with_val(bits, &raw.raw[k][1] - mu_n);
                let mut p = vec![Float::with_val(bits, 1)];
                for l in 1..=order {
                    let next = Float::with_val(bits, &p[l - 1] * &d);
                    p.push(next);
                }
                p
            })
            .collect();
        let mut cn = vec![Float::new(bits); order + 1];
        cn[0] = Float::with_val(bits, 1);
        let mut fn_row = vec![Float::new(bits); order + 1];
        for m in 1..=order {
            let mut lower = Float::new(bits);
            for k in 1..n {
                lower += Float::with_val(bits, &q[k - 1] * &central[k][m]);
            }
            let mut force = Float::new(bits);
            for ell in 1..=m {
                let r = m - ell;
                let mut acc = Float::new(bits);
                for k in 1..=n {
                    let c = if k == n { &cn[r] } else { &central[k][r] };
                    acc += Float::with_val(bits, &q[k - 1] * c) * &dpow[k - 1][ell];
                }
                force += acc * binom[m][ell];
            }
            cn[m] = Float::with_val(bits, &lower + &force) / &leave;
            fn_row[m] = force;
        }
        central[n] = cn;
        forcing[n] = fn_row;
    }
    FloatDirect { central, forcing }
}

/// Relative agreement `|a - b| ≤ 2^{-bits/2} max(|a|, |b|, 1)`.
pub(crate) fn check_agreement(a: &[Vec<Float>], b: &[Vec<Float>], bits: u32) -> Result<()> {
    let tol = Float::with_val(bits, Float::i_exp(1, -((bits / 2) as i32)));
    for (n, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (m, (x, y)) in ra.iter().zip(rb).enumerate() {
            let scale = Float::with_val(bits, x.abs_ref()).max(&Float::with_val(bits, y.abs_ref()));
            let scale = scale.max(&Float::with_val(bits, 1));
            let diff = Float::with_val(bits, x - y).abs();
            if diff > Float::with_val(bits, &tol * &scale) {
                return Err(Error::Consistency(format!(
                    "central moment routes differ at n={n}, m={m}: {} vs {}",
                    x.to_f64(),
                    y.to_f64()
                )));
            }
        }
    }
    Ok(())
}
