use rug::ops::Pow;
use rug::{Float, Integer};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use super::{exact, float};
use crate::error::{Error, Result};
use crate::exact_core::identities::harmonic_numbers;
use crate::exact_core::memo;
use crate::exact_core::number::{ratio_float, BigPrecision, ExactRational, Mode, Number};

#[derive(Clone, Debug)]
enum Storage {
    Exact {
        g: Vec<Integer>,
        delta: Vec<Integer>,
        raw: Vec<Vec<Integer>>,
        central: Vec<Vec<Integer>>,
        forcing: Option<Vec<Vec<Integer>>>,
    },
    Float {
        bits: u32,
        raw: Vec<Vec<Float>>,
        central: Vec<Vec<Float>>,
        forcing: Option<Vec<Vec<Float>>>,
    },
}

/// Raw and central moments of `X_1, ..., X_{n_max}` up to a fixed order.
///
/// Exact values are held unreduced internally and reduced when read.
#[derive(Clone, Debug)]
pub struct MomentTable {
    n_max: usize,
    order: usize,
    mode: Mode,
    /// Whether the direct central-moment recurrence was run and matched.
    routes_checked: bool,
    storage: Storage,
}

/// Mean values `μ_1..μ_{n_max}`; a [`MomentTable`] of order one.
#[derive(Clone, Debug)]
pub struct MeanValues(MomentTable);

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be positive".into()));
    }
    Ok(())
}

/// `μ_1..μ_{n_max}`.
pub fn mean_values(n_max: usize, mode: Mode) -> Result<MeanValues> {
    Ok(MeanValues(raw_moments(n_max, 1, mode)?))
}

/// Raw moments up to `order`, with central moments from the binomial transform.
pub fn raw_moments(n_max: usize, order: usize, mode: Mode) -> Result<MomentTable> {
    check_n_max(n_max)?;
    let storage = match mode {
        Mode::Exact => {
            let r = exact::raw_moments(n_max, order);
            let central = exact::central_binomial(&r);
            Storage::Exact {
                g: r.basis.g,
                delta: r.basis.delta,
                raw: r.raw,
                central,
                forcing: None,
            }
        }
        Mode::BigFloat(bits) => {
            let r = float::raw_moments(n_max, order, bits);
            let central = float::central_binomial(&r);
            Storage::Float { bits, raw: r.raw, central, forcing: None }
        }
    };
    Ok(MomentTable { n_max, order, mode, routes_checked: false, storage })
}

/// Central moments computed both by the binomial transform and by the direct
/// recurrence; errors if the two disagree (exactly, or beyond `2^{-bits/2}`
/// relative in float mode).
pub fn central_moments(n_max: usize, order: usize, mode: Mode) -> Result<MomentTable> {
    check_n_max(n_max)?;
    if order < 2 {
        return Err(Error::InvalidInput("central moments need order >= 2".into()));
    }
    let storage = match mode {
        Mode::Exact => {
            let r = exact::raw_moments(n_max, order);
            let central = exact::central_binomial(&r);
            let direct = exact::central_direct(&r)?;
            for n in 1..=n_max {
                if central[n] != direct.central[n] {
                    let m = (0..=order).find(|&m| central[n][m] != direct.central[n][m]);
                    return Err(Error::Consistency(format!(
                        "central moment routes differ at n={n}, m={m:?}"
                    )));
                }
            }
            Storage::Exact {
                g: r.basis.g,
                delta: r.basis.delta,
                raw: r.raw,
                central,
                forcing: Some(direct.forcing),
            }
        }
        Mode::BigFloat(bits) => {
            let r = float::raw_moments(n_max, order, bits);
            let central = float::central_binomial(&r);
            let direct = float::central_direct(&r);
            float::check_agreement(&central[1..], &direct.central[1..], bits)?;
            Storage::Float { bits, raw: r.raw, central, forcing: Some(direct.forcing) }
        }
    };
    Ok(MomentTable { n_max, order, mode, routes_checked: true, storage })
}

impl MomentTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn routes_checked(&self) -> bool {
        self.routes_checked
    }

    fn check(&self, n: usize, j: usize) {
        assert!((1..=self.n_max).contains(&n), "n={n} outside 1..={}", self.n_max);
        assert!(j <= self.order, "order {j} above {}", self.order);
    }

    /// `μ_n`.
    pub fn mu(&self, n: usize) -> Number {
        self.raw(n, 1)
    }

    /// `E[X_n^j]`.
    pub fn raw(&self, n: usize, j: usize) -> Number {
        self.check(n, j);
        match &self.storage {
            Storage::Exact { g, raw, .. } => {
                Number::Exact(ExactRational::from_ratio(&raw[n][j], &g[n].clone().pow(j as u32)))
            }
            Storage::Float { raw, .. } => Number::Float(BigPrecision::from_float(raw[n][j].clone())),
        }
    }

    /// `E[(X_n - μ_n)^m]`.
    pub fn central(&self, n: usize, m: usize) -> Number {
        self.check(n, m);
        match &self.storage {
            Storage::Exact { g, central, .. } => Number::Exact(ExactRational::from_ratio(
                &central[n][m],
                &g[n].clone().pow(m as u32),
            )),
            Storage::Float { central, .. } => {
                Number::Float(BigPrecision::from_float(central[n][m].clone()))
            }
        }
    }

    /// `E[(X_n - μ_n)^m]` rounded to `bits`, without reducing exact values.
    pub fn central_float(&self, n: usize, m: usize, bits: u32) -> Float {
        self.check(n, m);
        match &self.storage {
            Storage::Exact { g, central, .. } => {
                ratio_float(&central[n][m], &g[n].clone().pow(m as u32), bits)
            }
            Storage::Float { central, .. } => Float::with_val(bits, &central[n][m]),
        }
    }

    /// `E[X_n^j]` rounded to `bits`.
    pub fn raw_float(&self, n: usize, j: usize, bits: u32) -> Float {
        self.check(n, j);
        match &self.storage {
            Storage::Exact { g, raw, .. } => ratio_float(&raw[n][j], &g[n].clone().pow(j as u32), bits),
            Storage::Float { raw, .. } => Float::with_val(bits, &raw[n][j]),
        }
    }

    /// `ε_n = μ_n - n - H_{n-1}`.
    pub fn eps_mean(&self, n: usize) -> Number {
        match self.mu(n) {
            Number::Exact(mu) => {
                let h = harmonic_numbers(n - 1).pop().expect("nonempty");
                Number::Exact(mu - ExactRational::from(n as i64) - h)
            }
            Number::Float(mu) => {
                let bits = mu.bits();
                let mut h = Float::with_val(bits, 0);
                for k in 1..n {
                    h += Float::with_val(bits, 1) / k as u32;
                }
                let v = mu.into_float() - n as u32 - h;
                Number::Float(BigPrecision::from_float(v))
            }
        }
    }

    /// `ε_n^{(m)}`: the central moment minus its leading term.
    pub fn eps_central(&self, n: usize, m: usize) -> Number {
        match self.central(n, m) {
            Number::Exact(c) => Number::Exact(c - main_term(m, n)),
            Number::Float(c) => {
                let bits = c.bits();
                let main = Float::with_val(bits, main_term(m, n).as_rational());
                Number::Float(BigPrecision::from_float(c.into_float() - main))
            }
        }
    }

    /// `Σ_ℓ C(m,ℓ) I_ℓ^{(m)}(n)`, the forcing term of the order-`m` central
    /// recurrence; present only for tables built by [`central_moments`].
    pub fn forcing(&self, n: usize, m: usize) -> Option<Number> {
        self.check(n, m);
        match &self.storage {
            Storage::Exact { g, forcing: Some(f), .. } => {
                let den = g[n].clone().pow(m as u32) * memo::factorial(n);
                Some(Number::Exact(ExactRational::from_ratio(&f[n][m], &den)))
            }
            Storage::Float { forcing: Some(f), .. } => {
                Some(Number::Float(BigPrecision::from_float(f[n][m].clone())))
            }
            _ => None,
        }
    }

    pub fn means(&self) -> Result<MeanValues> {
        if self.order < 1 {
            return Err(Error::InvalidInput("table has no first moments".into()));
        }
        let storage = match &self.storage {
            Storage::Exact { g, delta, raw, .. } => Storage::Exact {
                g: g.clone(),
                delta: delta.clone(),
                raw: raw.iter().map(|r| r.iter().take(2).cloned().collect()).collect(),
                central: Vec::new(),
                forcing: None,
            },
            Storage::Float { bits, raw, .. } => Storage::Float {
                bits: *bits,
                raw: raw.iter().map(|r| r.iter().take(2).cloned().collect()).collect(),
                central: Vec::new(),
                forcing: None,
            },
        };
        Ok(MeanValues(MomentTable {
            n_max: self.n_max,
            order: 1,
            mode: self.mode,
            routes_checked: false,
            storage,
        }))
    }
}

/// Leading term of the order-`m` central moment:
/// `(2M-1)!! n^M` for `m = 2M` and `(2/3) M (2M+1)!! n^M` for `m = 2M+1`.
pub fn main_term(m: usize, n: usize) -> ExactRational {
    let big_m = m / 2;
    let npow = ExactRational::from(Integer::from(n).pow(big_m as u32));
    if m % 2 == 0 {
        ExactRational::from(double_factorial(2 * big_m as i64 - 1)) * npow
    } else {
        ExactRational::new(Integer::from(double_factorial(2 * big_m as i64 + 1)) * 2 * big_m as u64, 3)
            * npow
    }
}

fn double_factorial(k: i64) -> Integer {
    let mut out = Integer::from(1);
    let mut i = k;
    while i > 1 {
        out *= i;
        i -= 2;
    }
    out
}

/// Exact-mode view of a mean: `μ_n = num / den` (unreduced).
pub(crate) struct ScaledMeans<'a> {
    pub g: &'a [Integer],
    pub delta: &'a [Integer],
    pub raw: &'a [Vec<Integer>],
}

impl ScaledMeans<'_> {
    pub fn num(&self, n: usize) -> &Integer {
        &self.raw[n][1]
    }

    /// `(μ_n - μ_k) G_n` for `1 ≤ k ≤ n`, indexed by `k`.
    pub fn gaps(&self, n: usize) -> Vec<Integer> {
        let mut ratio = Integer::from(1);
        let mut out = vec![Integer::new(); n + 1];
        for k in (1..=n).rev() {
            if k < n {
                ratio *= &self.delta[k + 1];
            }
            out[k] = Integer::from(self.num(n) - Integer::from(self.num(k) * &ratio));
        }
        out
    }
}

impl MeanValues {
    pub fn n_max(&self) -> usize {
        self.0.n_max
    }

    pub fn mode(&self) -> Mode {
        self.0.mode
    }

    pub fn mu(&self, n: usize) -> Number {
        self.0.mu(n)
    }

    pub fn mu_float(&self, n: usize, bits: u32) -> Float {
        self.0.raw_float(n, 1, bits)
    }

    pub fn eps(&self, n: usize) -> Number {
        self.0.eps_mean(n)
    }

    pub fn to_vec(&self) -> Vec<Number> {
        (1..=self.n_max()).map(|n| self.mu(n)).collect()
    }

    pub fn table(&self) -> &MomentTable {
        &self.0
    }

    pub(crate) fn scaled(&self) -> Option<ScaledMeans<'_>> {
        match &self.0.storage {
            Storage::Exact { g, delta, raw, .. } => Some(ScaledMeans { g, delta, raw }),
            Storage::Float { .. } => None,
        }
    }
}

impl Serialize for MomentTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |f: &dyn Fn(usize, usize) -> Number| -> Vec<Vec<Number>> {
            (1..=self.n_max).map(|n| (0..=self.order).map(|j| f(n, j)).collect()).collect()
        };
        let mut st = serializer.serialize_struct("MomentTable", 8)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("bits", &self.mode.bits())?;
        st.serialize_field("n", &self.n_max)?;
        st.serialize_field("order", &self.order)?;
        if self.order >= 1 {
            let mu: Vec<Number> = (1..=self.n_max).map(|n| self.mu(n)).collect();
            st.serialize_field("mu", &mu)?;
        } else {
            st.serialize_field("mu", &Vec::<Number>::new())?;
        }
        st.serialize_field("raw", &rows(&|n, j| self.raw(n, j)))?;
        st.serialize_field("central", &rows(&|n, m| self.central(n, m)))?;
        st.serialize_field("routes_checked", &self.routes_checked)?;
        st.end()
    }
}
