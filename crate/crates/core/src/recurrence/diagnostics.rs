use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use super::moments::{main_term, MeanValues, MomentTable};
use crate::error::{Error, Result};
use crate::exact_core::number::Number;

/// Upper end of the range on which the strict `ε` inequalities are asserted.
pub const EPS_CHECK_MAX_N: usize = 200;

/// `ε_n` and the exact check of `0 < ε_n - ε_{n+1} < 1/n²`.
#[derive(Clone, Debug, Serialize)]
pub struct EpsReport {
    /// `ε_1..ε_{n_max}`.
    pub eps: Vec<Number>,
    /// `n² (ε_n - ε_{n+1})` for `n = 1..n_max-1`, as floats.
    pub scaled_diffs: Vec<f64>,
    /// Last `n` at which the inequality was checked.
    pub checked_through: usize,
    /// Values of `n` where the inequality fails.
    pub failures: Vec<usize>,
}

impl EpsReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes `ε_n` and checks `0 < ε_n - ε_{n+1} < 1/n²` for `2 ≤ n ≤ min(n_max - 1, 200)`
/// in integer arithmetic.
pub fn eps_mean_diagnostics(means: &MeanValues) -> Result<EpsReport> {
    let s = means
        .scaled()
        .ok_or_else(|| Error::InvalidInput("the ε check needs exact means".into()))?;
    let n_max = means.n_max();
    if n_max < 2 {
        return Err(Error::InvalidInput("the ε check needs n_max >= 2".into()));
    }
    let eps = (1..=n_max).map(|n| means.eps(n)).collect();
    let mut failures = Vec::new();
    let mut scaled_diffs = Vec::new();
    let top = (n_max - 1).min(EPS_CHECK_MAX_N);
    for n in 1..n_max {
        // ε_n - ε_{n+1} = μ_n - μ_{n+1} + 1 + 1/n; scaled by n² G_{n+1}:
        // d = n² (R_n Δ_{n+1} - R_{n+1}) + (n² + n) G_{n+1}
        let nn = (n * n) as u64;
        let gap = Integer::from(s.num(n) * &s.delta[n + 1]) - s.num(n + 1);
        let d = gap * nn + Integer::from(&s.g[n + 1] * (nn + n as u64));
        if (2..=top).contains(&n) && !(d > 0 && d < s.g[n + 1]) {
            failures.push(n);
        }
        let ratio = crate::exact_core::number::ratio_float(&d, &s.g[n + 1], 64);
        scaled_diffs.push(ratio.to_f64());
    }
    Ok(EpsReport { eps, scaled_diffs, checked_through: top, failures })
}

/// Values of `n` in `2..=n_max` where `n ≤ μ_n ≤ n + √n` fails, decided as
/// `μ_n ≥ n` and `(μ_n - n)² ≤ n`.
pub fn rao_bound_failures(means: &MeanValues) -> Result<Vec<usize>> {
    let s = means
        .scaled()
        .ok_or_else(|| Error::InvalidInput("the mean sandwich check needs exact means".into()))?;
    let mut out = Vec::new();
    for n in 2..=means.n_max() {
        let excess = Integer::from(s.num(n) - Integer::from(&s.g[n] * n as u64));
        let ok = excess >= 0
            && Integer::from(excess.square_ref()) <= Integer::from(s.g[n].square_ref()) * n as u64;
        if !ok {
            out.push(n);
        }
    }
    Ok(out)
}

/// `n - k ≤ μ_n - μ_k ≤ (n - k)(1 + 1/k)` for every `1 ≤ k ≤ n`, exactly.
pub fn mu_gap_bounds(means: &MeanValues, n: usize) -> Result<bool> {
    let s = means
        .scaled()
        .ok_or_else(|| Error::InvalidInput("the gap sandwich needs exact means".into()))?;
    if n == 0 || n > means.n_max() {
        return Err(Error::InvalidInput(format!("n={n} outside the mean table")));
    }
    let gaps = s.gaps(n);
    let g = &s.g[n];
    Ok((1..=n).all(|k| {
        let lo = Integer::from(g * (n - k) as u64);
        let hi = Integer::from(g * ((n - k) * (k + 1)) as u64);
        gaps[k] >= lo && Integer::from(&gaps[k] * k as u64) <= hi
    }))
}

/// One row of the central-moment error series.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorTermRow {
    pub n: usize,
    pub m: usize,
    pub central: f64,
    pub main_term: f64,
    /// `central / main_term`.
    pub ratio: f64,
    /// `ε_n^{(m)} = central - main_term`.
    pub eps: f64,
    /// `n |ε_n - ε_{n-1}|` for `m ≤ 3`, `|ε_n - ε_{n-1}| / (n^{⌊m/2⌋-2} log n)` for `m ≥ 4`.
    pub scaled_diff: Option<f64>,
}

/// `ε_n^{(m)}` and scaled successive differences for `2 ≤ m ≤ order`.
pub fn central_error_terms(table: &MomentTable) -> Result<Vec<ErrorTermRow>> {
    if table.order() < 2 {
        return Err(Error::InvalidInput("error terms need order >= 2".into()));
    }
    let bits = table.mode().bits().unwrap_or(0).max(320);
    let mut rows = Vec::new();
    for m in 2..=table.order() {
        let mut prev: Option<Float> = None;
        for n in 1..=table.n_max() {
            let central = table.central_float(n, m, bits);
            let main = Float::with_val(bits, main_term(m, n).as_rational());
            let eps = Float::with_val(bits, &central - &main);
            let scaled_diff = prev.as_ref().filter(|_| n >= 2).map(|p| {
                let d = Float::with_val(bits, &eps - p).abs();
                let d = if m <= 3 {
                    d * n as u32
                } else {
                    let scale = Float::with_val(bits, n).ln()
                        * Float::with_val(bits, n).pow((m / 2) as i32 - 2);
                    d / scale
                };
                d.to_f64()
            });
            rows.push(ErrorTermRow {
                n,
                m,
                central: central.to_f64(),
                main_term: main.to_f64(),
                ratio: if main.is_zero() { f64::NAN } else { Float::with_val(bits, &central / &main).to_f64() },
                eps: eps.to_f64(),
                scaled_diff,
            });
            prev = Some(eps);
        }
    }
    Ok(rows)
}
