//! Exact truncated law of `X_n` with a certified tail.

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_core::memo;
use crate::exact_core::number::{ratio_float, BigPrecision, ExactRational, Mode, Number};
use crate::exact_core::sequences::a_nk_row;
use crate::recurrence::exact_binomials;

/// Residual mass targeted by the automatic truncation.
pub const AUTO_RESIDUAL: f64 = 1e-30;
/// Layers tried before the automatic truncation gives up.
pub const AUTO_MAX_LAYERS: usize = 1 << 16;

#[derive(Clone, Debug)]
enum Storage {
    /// `P(X_n = m) = nums[m-1] / F^m` and residual `= residual / F^{m_max}` with `F = n!`.
    Exact { fact: Integer, nums: Vec<Integer>, residual: Integer },
    Float { pmf: Vec<Float>, residual: Float },
}

/// `P(X_n = m)` for `1 ≤ m ≤ m_max` plus the leftover mass `P(X_n > m_max)`.
///
/// For `n = 1` the vector is all zeros: the whole mass sits at `X_1 = 0`.
#[derive(Clone, Debug)]
pub struct TruncatedPmf {
    n: usize,
    m_max: usize,
    mode: Mode,
    storage: Storage,
}

/// How far to run the distribution recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Fixed(usize),
    /// Smallest `m_max` with residual below [`AUTO_RESIDUAL`].
    Auto,
}

impl std::str::FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(Truncation::Auto);
        }
        let m: usize = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("m_max must be a positive integer or auto, got {s:?}")))?;
        if m == 0 {
            return Err(Error::InvalidInput("m_max must be positive".into()));
        }
        Ok(Truncation::Fixed(m))
    }
}

/// `P(X_n = m) = Σ_k q_nk P(X_k = m-1)` with `P(X_1 = 0) = 1`, layer by layer in `m`.
pub fn exact_pmf(n: usize, m_max: Truncation, mode: Mode) -> Result<TruncatedPmf> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if m_max == Truncation::Fixed(0) {
        return Err(Error::InvalidInput("m_max must be positive".into()));
    }
    if n == 1 {
        let m = match m_max {
            Truncation::Fixed(m) => m,
            Truncation::Auto => 1,
        };
        let storage = match mode {
            Mode::Exact => Storage::Exact {
                fact: Integer::from(1),
                nums: vec![Integer::new(); m],
                residual: Integer::new(),
            },
            Mode::BigFloat(bits) => {
                Storage::Float { pmf: vec![Float::new(bits); m], residual: Float::new(bits) }
            }
        };
        return Ok(TruncatedPmf { n, m_max: m, mode, storage });
    }
    match mode {
        Mode::Exact => exact_layers(n, m_max),
        Mode::BigFloat(bits) => float_layers(n, m_max, bits),
    }
}

fn exact_layers(n: usize, m_max: Truncation) -> Result<TruncatedPmf> {
    let fact = memo::factorial(n);
    // coef[s][k-1] = A(s,k) n!/s!, so every layer shares the denominator (n!)^m.
    let coef: Vec<Vec<Integer>> = (0..=n)
        .map(|s| {
            if s < 2 {
                return Vec::new();
            }
            let scale = Integer::from(&fact / &memo::factorial(s));
            a_nk_row(s).into_iter().map(|c| c * &scale).collect()
        })
        .collect();
    let threshold = Integer::from(10).pow(30);
    let mut layer = vec![Integer::new(); n + 1];
    layer[1] = Integer::from(1);
    let mut nums = Vec::new();
    let mut mass = Integer::new();
    let mut fpow = Integer::from(1);
    loop {
        let m = nums.len() + 1;
        let mut next = vec![Integer::new(); n + 1];
        for s in 2..=n {
            let mut acc = Integer::new();
            for k in 1..=s {
                if layer[k] != 0 {
                    acc += &coef[s][k - 1] * &layer[k];
                }
            }
            next[s] = acc;
        }
        layer = next;
        mass = mass * &fact + &layer[n];
        fpow *= &fact;
        nums.push(layer[n].clone());
        let done = match m_max {
            Truncation::Fixed(limit) => m >= limit,
            Truncation::Auto => {
                if m >= AUTO_MAX_LAYERS {
                    return Err(Error::InvalidInput("automatic truncation did not converge".into()));
                }
                Integer::from(&fpow - &mass) * &threshold < fpow
            }
        };
        if done {
            let residual = fpow - mass;
            return Ok(TruncatedPmf {
                n,
                m_max: m,
                mode: Mode::Exact,
                storage: Storage::Exact { fact, nums, residual },
            });
        }
    }
}

fn float_layers(n: usize, m_max: Truncation, bits: u32) -> Result<TruncatedPmf> {
    let q: Vec<Vec<Float>> = (0..=n)
        .map(|s| {
            if s < 2 {
                return Vec::new();
            }
            let f = memo::factorial(s);
            a_nk_row(s).iter().map(|c| ratio_float(c, &f, bits)).collect()
        })
        .collect();
    let threshold = Float::with_val(bits, AUTO_RESIDUAL);
    let mut layer = vec![Float::new(bits); n + 1];
    layer[1] = Float::with_val(bits, 1);
    let mut pmf = Vec::new();
    let mut residual = Float::with_val(bits, 1);
    loop {
        let m = pmf.len() + 1;
        let mut next = vec![Float::new(bits); n + 1];
        for s in 2..=n {
            let mut acc = Float::new(bits);
            for k in 1..=s {
                acc += Float::with_val(bits, &q[s][k - 1] * &layer[k]);
            }
            next[s] = acc;
        }
        layer = next;
        residual -= &layer[n];
        pmf.push(layer[n].clone());
        let done = match m_max {
            Truncation::Fixed(limit) => m >= limit,
            Truncation::Auto => {
                if m >= AUTO_MAX_LAYERS {
                    return Err(Error::InvalidInput("automatic truncation did not converge".into()));
                }
                residual < threshold
            }
        };
        if done {
            return Ok(TruncatedPmf {
                n,
                m_max: m,
                mode: Mode::BigFloat(bits),
                storage: Storage::Float { pmf, residual },
            });
        }
    }
}

impl TruncatedPmf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// True for the terminal record `n = 1`, where `P(X_1 = 0) = 1`.
    pub fn is_terminal(&self) -> bool {
        self.n == 1
    }

    /// `P(X_n = m)` for `1 ≤ m ≤ m_max`.
    pub fn prob(&self, m: usize) -> Number {
        assert!((1..=self.m_max).contains(&m), "m={m} outside 1..={}", self.m_max);
        match &self.storage {
            Storage::Exact { fact, nums, .. } => {
                Number::Exact(ExactRational::from_ratio(&nums[m - 1], &fact.clone().pow(m as u32)))
            }
            Storage::Float { pmf, .. } => Number::Float(BigPrecision::from_float(pmf[m - 1].clone())),
        }
    }

    pub fn probs(&self) -> Vec<Number> {
        (1..=self.m_max).map(|m| self.prob(m)).collect()
    }

    /// `P(X_n > m_max)`.
    pub fn residual(&self) -> Number {
        match &self.storage {
            Storage::Exact { fact, residual, .. } => Number::Exact(ExactRational::from_ratio(
                residual,
                &fact.clone().pow(self.m_max as u32),
            )),
            Storage::Float { residual, .. } => Number::Float(BigPrecision::from_float(residual.clone())),
        }
    }

    /// `Σ_m m^j P(X_n = m)` over the truncated support.
    fn partial_moment(&self, j: u32) -> Number {
        match &self.storage {
            Storage::Exact { fact, nums, .. } => {
                let mut acc = Integer::new();
                for (i, x) in nums.iter().enumerate() {
                    acc *= fact;
                    acc += Integer::from(i + 1).pow(j) * x;
                }
                let den = fact.clone().pow(self.m_max as u32);
                Number::Exact(ExactRational::new(acc, den))
            }
            Storage::Float { pmf, .. } => {
                let bits = pmf.first().map(|p| p.prec()).unwrap_or(64);
                let mut acc = Float::new(bits);
                for (i, p) in pmf.iter().enumerate() {
                    acc += Float::with_val(bits, p * Float::with_val(bits, i + 1).pow(j));
                }
                Number::Float(BigPrecision::from_float(acc))
            }
        }
    }
}

impl Serialize for TruncatedPmf {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("TruncatedPmf", 7)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("m_max", &self.m_max)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("bits", &self.mode.bits())?;
        st.serialize_field("terminal", &self.is_terminal())?;
        st.serialize_field("pmf", &self.probs())?;
        st.serialize_field("residual", &self.residual())?;
        st.end()
    }
}

/// Self-loop probability `q_nn = A(n-1)/n!`.
pub fn stay_probability(n: usize) -> ExactRational {
    assert!(n >= 1);
    ExactRational::new(memo::a_number(n - 1), memo::factorial(n))
}

/// `ρ = max_{2 ≤ j ≤ n} q_jj`, the worst self-loop probability along the descent.
pub fn rho(n: usize) -> ExactRational {
    assert!(n >= 2, "ρ needs n >= 2");
    (2..=n).map(stay_probability).max().expect("nonempty range")
}

/// Law of the dominating variable `Y = T_2 + ... + T_n`, with `T_s` i.i.d.
/// geometric on `{1, 2, ...}` with continuation probability `ρ`.
///
/// The holding time of the size chain at `s` is geometric with continuation
/// `q_ss ≤ ρ`, and at most `n - 1` sizes are visited, so `X_n ≤ Y` stochastically.
struct Envelope {
    r: usize,
    rho: ExactRational,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Envelope { r: n - 1, rho: rho(n) }
    }

    /// `P(Y ≤ m)`.
    fn cdf(&self, m: usize) -> ExactRational {
        if m < self.r {
            return ExactRational::zero();
        }
        let base = (ExactRational::one() - &self.rho).pow(self.r as i32);
        let mut total = ExactRational::zero();
        let mut term = base;
        // P(Y = r + f) = C(f + r - 1, f) ρ^f (1 - ρ)^r
        for f in 0..=(m - self.r) {
            if f > 0 {
                term = term * &self.rho * ExactRational::new((f + self.r - 1) as i64, f as i64);
            }
            total += &term;
        }
        total
    }

    /// `E[Y^j; Y > m]` for `j = 0..=order`.
    fn tail_moments(&self, m: usize, order: usize) -> Vec<ExactRational> {
        let binom = exact_binomials(order);
        let ratio = &self.rho / &(ExactRational::one() - &self.rho);
        let mut t = vec![ExactRational::one(); order + 1];
        for i in 1..=order {
            let mut s = ExactRational::zero();
            for a in 0..i {
                s += ExactRational::from(binom[i][a] as i64) * &t[a];
            }
            t[i] = ExactRational::one() + &ratio * &s;
        }
        let mut y = vec![ExactRational::zero(); order + 1];
        y[0] = ExactRational::one();
        for _ in 0..self.r {
            let mut next = vec![ExactRational::zero(); order + 1];
            for (j, slot) in next.iter_mut().enumerate() {
                for i in 0..=j {
                    *slot += ExactRational::from(binom[j][i] as i64) * &y[i] * &t[j - i];
                }
            }
            y = next;
        }
        // Subtract the head Σ_{v ≤ m} v^j P(Y = v).
        if m >= self.r {
            let base = (ExactRational::one() - &self.rho).pow(self.r as i32);
            let mut term = base;
            for f in 0..=(m - self.r) {
                if f > 0 {
                    term = term * &self.rho * ExactRational::new((f + self.r - 1) as i64, f as i64);
                }
                let v = ExactRational::from((self.r + f) as i64);
                let mut vp = ExactRational::one();
                for slot in y.iter_mut() {
                    *slot -= &vp * &term;
                    vp = vp * &v;
                }
            }
        }
        y
    }
}

/// Certified bound `P(X_n > m) ≤ P(Y > m)`.
pub fn tail_bound(n: usize, m: usize) -> Result<ExactRational> {
    if n < 2 {
        return Err(Error::InvalidInput("tail bound needs n >= 2".into()));
    }
    Ok(ExactRational::one() - Envelope::new(n).cdf(m))
}

/// An enclosure `[lower, upper]` of `E[X_n^j]`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentInterval {
    pub j: usize,
    pub lower: Number,
    pub upper: Number,
}

impl MomentInterval {
    pub fn contains(&self, v: &Number) -> bool {
        match (&self.lower, &self.upper, v) {
            (Number::Exact(lo), Number::Exact(hi), Number::Exact(x)) => lo <= x && x <= hi,
            _ => {
                let bits = 512;
                let x = v.to_float(bits);
                self.lower.to_float(bits) <= x && x <= self.upper.to_float(bits)
            }
        }
    }

    pub fn width(&self) -> f64 {
        match (&self.lower, &self.upper) {
            (Number::Exact(lo), Number::Exact(hi)) => (hi - lo).to_f64(),
            _ => (self.upper.to_float(256) - self.lower.to_float(256)).to_f64(),
        }
    }
}

/// Encloses `E[X_n^j]` for `1 ≤ j ≤ order` using the truncated pmf and the
/// geometric envelope for the tail beyond `m_max`.
pub fn pmf_moments(pmf: &TruncatedPmf, order: usize) -> Result<Vec<MomentInterval>> {
    if order == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    if pmf.is_terminal() {
        let zero = match pmf.mode {
            Mode::Exact => Number::Exact(ExactRational::zero()),
            Mode::BigFloat(bits) => Number::Float(BigPrecision::from_float(Float::new(bits))),
        };
        return Ok((1..=order)
            .map(|j| MomentInterval { j, lower: zero.clone(), upper: zero.clone() })
            .collect());
    }
    if pmf.m_max < pmf.n {
        return Err(Error::TruncationTooShort { m_max: pmf.m_max, minimum: pmf.n });
    }
    let tails = Envelope::new(pmf.n).tail_moments(pmf.m_max, order);
    Ok((1..=order)
        .map(|j| {
            let lower = pmf.partial_moment(j as u32);
            let upper = match &lower {
                Number::Exact(lo) => Number::Exact(lo + &tails[j]),
                Number::Float(lo) => {
                    let bits = lo.bits();
                    let (hi, _) = Float::with_val_round(
                        bits,
                        lo.value() + Float::with_val(bits * 2, tails[j].as_rational()),
                        rug::float::Round::Up,
                    );
                    Number::Float(BigPrecision::from_float(hi))
                }
            };
            MomentInterval { j, lower, upper }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::raw_moments;

    fn r(n: i64, d: i64) -> Number {
        Number::Exact(ExactRational::new(n, d))
    }

    #[test]
    fn two_is_geometric() {
        let p = exact_pmf(2, Truncation::Fixed(12), Mode::Exact).unwrap();
        for m in 1..=12 {
            assert_eq!(p.prob(m), Number::Exact(ExactRational::new(1, 2).pow(m as i32)));
        }
        assert_eq!(p.residual(), Number::Exact(ExactRational::new(1, 2).pow(12)));
    }

    #[test]
    fn three_by_hand() {
        let p = exact_pmf(3, Truncation::Fixed(2), Mode::Exact).unwrap();
        assert_eq!(p.prob(1), r(1, 6));
        assert_eq!(p.prob(2), r(1, 4));
    }

    #[test]
    fn terminal_record() {
        let p = exact_pmf(1, Truncation::Fixed(5), Mode::Exact).unwrap();
        assert!(p.is_terminal());
        assert!(p.probs().iter().all(|x| x.to_f64() == 0.0));
        assert_eq!(p.residual(), r(0, 1));
        let m = pmf_moments(&p, 3).unwrap();
        assert!(m.iter().all(|i| i.lower == r(0, 1) && i.upper == r(0, 1)));
    }

    #[test]
    fn first_step_is_identity_permutation() {
        for n in 2..8 {
            let p = exact_pmf(n, Truncation::Fixed(1), Mode::Exact).unwrap();
            assert_eq!(p.prob(1), Number::Exact(ExactRational::new(1, memo::factorial(n))));
        }
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(2), ExactRational::new(1, 2));
        assert_eq!(rho(3), ExactRational::new(1, 2));
        assert_eq!(rho(40), ExactRational::new(1, 2));
        let stay = stay_probability(60).to_f64();
        assert!((stay - (-1f64).exp()).abs() < 0.01);
    }

    #[test]
    fn geometric_tail_bound_is_exact_for_two() {
        for m in 0..20 {
            assert_eq!(tail_bound(2, m).unwrap(), ExactRational::new(1, 2).pow(m as i32));
        }
    }

    #[test]
    fn two_mean_interval() {
        let p = exact_pmf(2, Truncation::Fixed(60), Mode::Exact).unwrap();
        let m = pmf_moments(&p, 1).unwrap();
        assert!(m[0].contains(&r(2, 1)));
        assert!(m[0].width() < 1e-15);
    }

    #[test]
    fn auto_truncation() {
        let p = exact_pmf(10, Truncation::Auto, Mode::Exact).unwrap();
        assert!(p.residual().to_f64() < AUTO_RESIDUAL);
        let shorter = exact_pmf(10, Truncation::Fixed(p.m_max() - 1), Mode::Exact).unwrap();
        assert!(shorter.residual().to_f64() >= AUTO_RESIDUAL);
    }

    #[test]
    fn too_short_truncation_is_reported() {
        let p = exact_pmf(6, Truncation::Fixed(4), Mode::Exact).unwrap();
        assert_eq!(pmf_moments(&p, 1).unwrap_err(), Error::TruncationTooShort { m_max: 4, minimum: 6 });
    }

    #[test]
    fn float_matches_exact() {
        let e = exact_pmf(7, Truncation::Fixed(40), Mode::Exact).unwrap();
        let f = exact_pmf(7, Truncation::Fixed(40), Mode::BigFloat(256)).unwrap();
        for m in 1..=40 {
            let (a, b) = (e.prob(m).to_f64(), f.prob(m).to_f64());
            assert!((a - b).abs() <= 1e-15 * a.abs(), "m={m}");
        }
        let t = raw_moments(7, 2, Mode::Exact).unwrap();
        let fi = pmf_moments(&exact_pmf(7, Truncation::Auto, Mode::BigFloat(256)).unwrap(), 2).unwrap();
        assert!(fi[1].contains(&t.raw(7, 2)));
    }
}
