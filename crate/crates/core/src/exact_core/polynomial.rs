use std::ops::{Add, Mul};

use serde::Serialize;

use super::number::ExactRational;

/// A polynomial in `z` with exact rational coefficients; `coeffs[i]` multiplies `z^i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RationalPolynomial {
    coeffs: Vec<ExactRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<ExactRational>) -> Self {
        while coeffs.last().is_some_and(ExactRational::is_zero) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · z^power`.
    pub fn monomial(c: ExactRational, power: usize) -> Self {
        let mut coeffs = vec![ExactRational::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    /// `(a + b z)^e` by the binomial theorem.
    pub fn binomial_power(a: &ExactRational, b: &ExactRational, e: usize) -> Self {
        let mut coeffs = Vec::with_capacity(e + 1);
        let mut binom = ExactRational::one();
        for i in 0..=e {
            if i > 0 {
                binom = binom * ExactRational::new((e - i + 1) as i64, i as i64);
            }
            coeffs.push(&binom * &(a.pow((e - i) as i32) * b.pow(i as i32)));
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> ExactRational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, z: &ExactRational) -> ExactRational {
        self.coeffs.iter().rev().fold(ExactRational::zero(), |acc, c| acc * z + c)
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![ExactRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPolynomial::new(out)
    }
}
