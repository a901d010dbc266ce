use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact rational number, always stored in lowest terms with a positive denominator.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(Rational);

impl ExactRational {
    /// Builds `num / den`, reducing to lowest terms.
    ///
    /// # Panics
    /// Panics if `den` is zero.
    pub fn new(num: impl Into<Integer>, den: impl Into<Integer>) -> Self {
        let den = den.into();
        assert!(den != 0, "zero denominator");
        ExactRational(Rational::from((num.into(), den)))
    }

    /// Reduces `num / den` given by reference. Cost is one gcd of the operands.
    pub fn from_ratio(num: &Integer, den: &Integer) -> Self {
        assert!(*den != 0, "zero denominator");
        ExactRational(Rational::from((num, den)))
    }

    pub fn zero() -> Self {
        ExactRational(Rational::new())
    }

    pub fn one() -> Self {
        ExactRational(Rational::from(1))
    }

    pub fn num(&self) -> &Integer {
        self.0.numer()
    }

    pub fn den(&self) -> &Integer {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }

    pub fn signum(&self) -> i32 {
        match self.0.cmp0() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> Self {
        ExactRational(Rational::from(self.0.abs_ref()))
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        ExactRational(Rational::from(self.0.recip_ref()))
    }

    /// Integer power; `0^0 = 1`.
    pub fn pow(&self, exp: i32) -> Self {
        use rug::ops::Pow;
        if exp < 0 {
            return self.recip().pow(-exp);
        }
        ExactRational(Rational::from((&self.0).pow(exp as u32)))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn to_big(&self, bits: u32) -> BigPrecision {
        BigPrecision::from_exact(self, bits)
    }
}

impl From<Rational> for ExactRational {
    fn from(r: Rational) -> Self {
        ExactRational(r)
    }
}

impl From<Integer> for ExactRational {
    fn from(i: Integer) -> Self {
        ExactRational(Rational::from(i))
    }
}

impl From<&Integer> for ExactRational {
    fn from(i: &Integer) -> Self {
        ExactRational(Rational::from(i))
    }
}

impl From<i64> for ExactRational {
    fn from(i: i64) -> Self {
        ExactRational(Rational::from(i))
    }
}

impl From<(i64, i64)> for ExactRational {
    fn from((n, d): (i64, i64)) -> Self {
        ExactRational::new(n, d)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $tr<&ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational(Rational::from($tr::$method(&self.0, &rhs.0)))
            }
        }
        impl $tr<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational($tr::$method(self.0, &rhs.0))
            }
        }
        impl $assign_tr<&ExactRational> for ExactRational {
            fn $assign(&mut self, rhs: &ExactRational) {
                $assign_tr::$assign(&mut self.0, &rhs.0);
            }
        }
        impl $assign_tr<ExactRational> for ExactRational {
            fn $assign(&mut self, rhs: ExactRational) {
                $assign_tr::$assign(&mut self.0, rhs.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);

impl Div<&ExactRational> for &ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: &ExactRational) -> ExactRational {
        assert!(!rhs.is_zero(), "division by zero");
        ExactRational(Rational::from(&self.0 / &rhs.0))
    }
}

impl Div<ExactRational> for ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: ExactRational) -> ExactRational {
        &self / &rhs
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(Rational::from(-&self.0))
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactRational> for ExactRational {
    fn sum<I: Iterator<Item = &'a ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.125"` or `"1e-3"`.
impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: Integer = n.trim().parse().map_err(|_| bad())?;
            let d: Integer = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(ExactRational::new(n, d));
        }
        if let Ok(i) = s.parse::<Integer>() {
            return Ok(ExactRational::from(i));
        }
        parse_decimal(s).ok_or_else(bad)
    }
}

fn parse_decimal(s: &str) -> Option<ExactRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: Integer = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / 10;
    let scale = exp - frac_part.len() as i32;
    let ten = ExactRational::from(10);
    let mut value = ExactRational::from(digits) * ten.pow(scale);
    if neg {
        value = -value;
    }
    Some(value)
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ExactRational", 2)?;
        st.serialize_field("num", &self.num().to_string())?;
        st.serialize_field("den", &self.den().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: String,
            den: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let num: Integer = raw.num.parse().map_err(de::Error::custom)?;
        let den: Integer = raw.den.parse().map_err(de::Error::custom)?;
        if den <= 0 {
            return Err(de::Error::custom("denominator must be positive"));
        }
        Ok(ExactRational::new(num, den))
    }
}

/// A binary floating-point value with an explicit mantissa precision.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigPrecision(Float);

impl BigPrecision {
    pub const DEFAULT_BITS: u32 = 256;

    pub fn from_float(value: Float) -> Self {
        BigPrecision(value)
    }

    /// Correctly rounded conversion.
    pub fn from_exact(r: &ExactRational, bits: u32) -> Self {
        BigPrecision(Float::with_val(bits, r.as_rational()))
    }

    /// Correctly rounded `num / den` without reducing the fraction first.
    pub fn from_ratio(num: &Integer, den: &Integer, bits: u32) -> Self {
        BigPrecision(ratio_float(num, den, bits))
    }

    pub fn bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn value(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Decimal rendering with enough digits to round-trip the mantissa.
    pub fn to_decimal(&self) -> String {
        let digits = (self.bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        self.0.to_string_radix(10, Some(digits))
    }
}

/// `num / den` rounded once to `bits`.
pub(crate) fn ratio_float(num: &Integer, den: &Integer, bits: u32) -> Float {
    let a = Float::with_val(num.significant_bits().max(1), num);
    let b = Float::with_val(den.significant_bits().max(1), den);
    Float::with_val(bits, &a / &b)
}

impl fmt::Display for BigPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl Serialize for BigPrecision {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("BigPrecision", 2)?;
        st.serialize_field("value", &self.to_decimal())?;
        st.serialize_field("bits", &self.bits())?;
        st.end()
    }
}

/// A value produced in either arithmetic mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Number {
    Exact(ExactRational),
    Float(BigPrecision),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => r.to_f64(),
            Number::Float(f) => f.to_f64(),
        }
    }

    /// High-precision view of the value; exact values are rounded to `bits`.
    pub fn to_float(&self, bits: u32) -> Float {
        match self {
            Number::Exact(r) => Float::with_val(bits, r.as_rational()),
            Number::Float(f) => Float::with_val(bits, f.value()),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactRational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    /// Renders the value with `digits` significant decimal digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let bits = match self {
            Number::Exact(_) => (digits as f64 / std::f64::consts::LOG10_2) as u32 + 64,
            Number::Float(f) => f.bits(),
        };
        self.to_float(bits).to_string_radix(10, Some(digits))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => r.fmt(f),
            Number::Float(x) => x.fmt(f),
        }
    }
}

/// Arithmetic mode for the moment and distribution engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    BigFloat(u32),
}

impl Mode {
    /// Largest `n` handled in exact mode when no mode is requested.
    pub const EXACT_DEFAULT_LIMIT: usize = 150;

    pub fn auto(n_max: usize) -> Mode {
        if n_max <= Self::EXACT_DEFAULT_LIMIT {
            Mode::Exact
        } else {
            Mode::BigFloat(BigPrecision::DEFAULT_BITS)
        }
    }

    pub fn bits(&self) -> Option<u32> {
        match self {
            Mode::Exact => None,
            Mode::BigFloat(b) => Some(*b),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::BigFloat(b) => write!(f, "bigfloat:{b}"),
        }
    }
}

/// Accepts `exact`, `bigfloat`, `bigfloat:512` and `bigfloat(512)`.
impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "exact" {
            return Ok(Mode::Exact);
        }
        let rest = s
            .strip_prefix("bigfloat")
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode {s:?}")))?;
        if rest.is_empty() {
            return Ok(Mode::BigFloat(BigPrecision::DEFAULT_BITS));
        }
        let digits = rest
            .strip_prefix(':')
            .or_else(|| rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode {s:?}")))?;
        let bits: u32 = digits
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad precision in mode {s:?}")))?;
        if !(16..=1 << 20).contains(&bits) {
            return Err(Error::InvalidInput(format!("precision {bits} out of range")));
        }
        Ok(Mode::BigFloat(bits))
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
