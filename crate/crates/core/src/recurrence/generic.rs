use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use super::float::float_row;
use crate::error::{Error, Result};
use crate::exact_core::memo;
use crate::exact_core::number::{ratio_float, BigPrecision, ExactRational, Mode, Number};
use crate::exact_core::sequences::a_nk_row;

/// Diagnostics for one `n` of a generic run, all rounded to `f64`.
#[derive(Clone, Debug, Serialize)]
pub struct GenericRow {
    pub n: usize,
    pub lambda: f64,
    pub xi: f64,
    /// `ξ_n - M/(L+1) n^{L+1}`.
    pub eta: f64,
    /// `λ_n - M n^L`.
    pub delta: f64,
    /// `|η_n| / Σ_{j≤n} (|δ_j| + j^{L-1})`.
    pub ratio: f64,
    /// `n |η_n - η_{n-1}|` for `L = 0`, `|η_n - η_{n-1}| / (n^{L-1} log n)` for `L ≥ 1`.
    pub scaled_diff: Option<f64>,
    /// `ξ_n / (M/(L+1) n^{L+1})`, absent when `M = 0`.
    pub trend: Option<f64>,
}

#[derive(Clone, Debug)]
enum Xi {
    /// `ξ_n = z[n] / d[n]`.
    Exact { z: Vec<Integer>, d: Vec<Integer> },
    Float(Vec<Float>),
}

/// Solution of `(1 - q_nn) ξ_n = λ_n + Σ_{k<n} q_nk ξ_k` for `n > n0`.
#[derive(Clone, Debug)]
pub struct GenericRecurrenceRun {
    pub big_l: u32,
    pub big_m: ExactRational,
    pub mode: Mode,
    pub n0: usize,
    pub n_max: usize,
    pub rows: Vec<GenericRow>,
    xi: Xi,
}

impl GenericRecurrenceRun {
    /// `ξ_n` for `1 ≤ n ≤ n_max`.
    pub fn xi(&self, n: usize) -> Number {
        assert!((1..=self.n_max).contains(&n));
        match &self.xi {
            Xi::Exact { z, d } => Number::Exact(ExactRational::from_ratio(&z[n], &d[n])),
            Xi::Float(v) => Number::Float(BigPrecision::from_float(v[n].clone())),
        }
    }

    pub fn xi_vec(&self) -> Vec<Number> {
        (1..=self.n_max).map(|n| self.xi(n)).collect()
    }

    /// Largest diagnostic ratio over `n > n0`.
    pub fn sup_ratio(&self) -> f64 {
        self.rows.iter().filter(|r| r.n > self.n0).map(|r| r.ratio).fold(0.0, f64::max)
    }
}

fn exact_values(values: &[Number], what: &str) -> Result<Vec<ExactRational>> {
    values
        .iter()
        .map(|v| {
            v.as_exact()
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("{what} must be exact in exact mode")))
        })
        .collect()
}

/// Runs the recurrence with `λ_1..λ_{n_max}` from `lambda` and
/// `ξ_1..ξ_{n0}` from `initial`.
pub fn generic_recurrence(
    big_l: u32,
    big_m: &ExactRational,
    lambda: &[Number],
    initial: &[Number],
    n_max: usize,
    mode: Mode,
) -> Result<GenericRecurrenceRun> {
    let n0 = initial.len();
    if n0 < 2 {
        return Err(Error::InvalidInput("need at least two initial values".into()));
    }
    if big_l > 0 && big_m.is_zero() {
        return Err(Error::InvalidInput("M must be nonzero when L > 0".into()));
    }
    if n_max < n0 {
        return Err(Error::InvalidInput(format!("n_max={n_max} below the {n0} initial values")));
    }
    if lambda.len() < n_max {
        return Err(Error::InvalidInput(format!(
            "λ table has {} entries, need {n_max}",
            lambda.len()
        )));
    }
    let xi = match mode {
        Mode::Exact => {
            let lambda = exact_values(&lambda[..n_max], "λ")?;
            let initial = exact_values(initial, "initial values")?;
            solve_exact(&lambda, &initial, n_max)
        }
        Mode::BigFloat(bits) => {
            let lambda: Vec<Float> = lambda[..n_max].iter().map(|v| v.to_float(bits)).collect();
            let initial: Vec<Float> = initial.iter().map(|v| v.to_float(bits)).collect();
            solve_float(&lambda, &initial, n_max, bits)
        }
    };
    let bits = mode.bits().unwrap_or(256);
    let lambda_f: Vec<Float> = lambda[..n_max].iter().map(|v| v.to_float(bits)).collect();
    let xi_f: Vec<Float> = (1..=n_max)
        .map(|n| match &xi {
            Xi::Exact { z, d } => ratio_float(&z[n], &d[n], bits),
            Xi::Float(v) => Float::with_val(bits, &v[n]),
        })
        .collect();
    let rows = diagnostics(big_l, big_m, &lambda_f, &xi_f, bits);
    Ok(GenericRecurrenceRun { big_l, big_m: big_m.clone(), mode, n0, n_max, rows, xi })
}

fn solve_exact(lambda: &[ExactRational], initial: &[ExactRational], n_max: usize) -> Xi {
    // d[n] = d[n-1] * step[n]
    let mut z = vec![Integer::new(); n_max + 1];
    let mut d = vec![Integer::from(1); n_max + 1];
    let mut step = vec![Integer::from(1); n_max + 1];
    for (i, v) in initial.iter().enumerate() {
        let k = i + 1;
        z[k] = Integer::from(v.num() * &d[k - 1]);
        step[k] = v.den().clone();
        d[k] = Integer::from(&d[k - 1] * &step[k]);
    }
    memo::with_tables(n_max, |fact, a| {
        for n in initial.len() + 1..=n_max {
            let row = a_nk_row(n);
            let mut h = Integer::new();
            for k in 1..n {
                h *= &step[k];
                h += &row[k - 1] * &z[k];
            }
            let lam = &lambda[n - 1];
            let delta = Integer::from(&fact[n] - &a[n - 1]);
            z[n] = Integer::from(&fact[n] * lam.num()) * &d[n - 1] + h * lam.den();
            step[n] = Integer::from(lam.den() * &delta);
            d[n] = Integer::from(&d[n - 1] * &step[n]);
        }
    });
    Xi::Exact { z, d }
}

fn solve_float(lambda: &[Float], initial: &[Float], n_max: usize, bits: u32) -> Xi {
    let mut xi = vec![Float::new(bits); n_max + 1];
    for (i, v) in initial.iter().enumerate() {
        xi[i + 1] = v.clone();
    }
    for n in initial.len() + 1..=n_max {
        let (q, leave) = float_row(n, bits);
        let mut acc = Float::with_val(bits, &lambda[n - 1]);
        for k in 1..n {
            acc += Float::with_val(bits, &q[k - 1] * &xi[k]);
        }
        xi[n] = acc / &leave;
    }
    Xi::Float(xi)
}

fn diagnostics(
    big_l: u32,
    big_m: &ExactRational,
    lambda: &[Float],
    xi: &[Float],
    bits: u32,
) -> Vec<GenericRow> {
    let m = Float::with_val(bits, big_m.as_rational());
    let lead = Float::with_val(bits, &m / (big_l + 1));
    let mut rows = Vec::with_capacity(xi.len());
    let mut denom = Float::new(bits);
    let mut prev_eta: Option<Float> = None;
    for (i, (x, lam)) in xi.iter().zip(lambda).enumerate() {
        let n = i + 1;
        let nf = Float::with_val(bits, n);
        let main = Float::with_val(bits, &lead * Float::with_val(bits, (&nf).pow(big_l + 1)));
        let eta = Float::with_val(bits, x - &main);
        let delta = Float::with_val(bits, lam - Float::with_val(bits, &m * Float::with_val(bits, (&nf).pow(big_l))));
        denom += Float::with_val(bits, delta.abs_ref());
        denom += Float::with_val(bits, (&nf).pow(big_l as i32 - 1));
        let ratio = Float::with_val(bits, eta.abs_ref()) / &denom;
        let scaled_diff = prev_eta.as_ref().map(|p| {
            let diff = Float::with_val(bits, &eta - p).abs();
            if big_l == 0 {
                (diff * &nf).to_f64()
            } else {
                let scale = Float::with_val(bits, (&nf).pow(big_l as i32 - 1)) * nf.clone().ln();
                (diff / scale).to_f64()
            }
        });
        let trend = (!main.is_zero()).then(|| Float::with_val(bits, x / &main).to_f64());
        rows.push(GenericRow {
            n,
            lambda: lam.to_f64(),
            xi: x.to_f64(),
            eta: eta.to_f64(),
            delta: delta.to_f64(),
            ratio: ratio.to_f64(),
            scaled_diff: scaled_diff.filter(|_| n >= 2),
            trend,
        });
        prev_eta = Some(eta);
    }
    rows
}
