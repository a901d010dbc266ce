//! Named identity checks over a range of `n`, as driven by the command line.

use std::fmt;
use std::str::FromStr;

use rug::Integer;
use serde::Serialize;

use super::bell::{bell_by_triangle, bell_stirling};
use super::identities::{
    egf_coefficients, nk_moment_identity, s_penultimate_bound_holds, s_polynomial_identity,
    s_sum_identities, z_polynomial_identity,
};
use super::memo;
use super::number::ExactRational;
use super::sequences::{a_closed_form, a_floor_check, a_nk_row};
use crate::error::Error;

/// Highest `ℓ` used by the `(n-k)^ℓ` moment check.
pub const NK_MAX_ELL: usize = 8;
/// Largest `n` for the two polynomial identities.
pub const POLY_MAX_N: usize = 50;
/// Smallest `n` for the `S_n(n-1)` bound.
pub const S_BOUND_MIN_N: usize = 200;
/// Rows of the Bell/Stirling check.
pub const DOBINSKI_MAX_ELL: usize = 12;
/// Coefficients compared against the exponential generating function.
pub const EGF_TERMS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Identity {
    Normalization,
    NkMoment,
    ZPolynomial,
    SPolynomial,
    SSums,
    SBound,
    Dobinski,
    AClosedForm,
    AFloor,
    Egf,
}

impl Identity {
    pub const ALL: [Identity; 10] = [
        Identity::Normalization,
        Identity::NkMoment,
        Identity::ZPolynomial,
        Identity::SPolynomial,
        Identity::SSums,
        Identity::SBound,
        Identity::Dobinski,
        Identity::AClosedForm,
        Identity::AFloor,
        Identity::Egf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Normalization => "sum1",
            Identity::NkMoment => "nk-moment",
            Identity::ZPolynomial => "z-gf",
            Identity::SPolynomial => "s-gf",
            Identity::SSums => "s-sums",
            Identity::SBound => "s-bound",
            Identity::Dobinski => "dobinski",
            Identity::AClosedForm => "a-closed-form",
            Identity::AFloor => "a-floor",
            Identity::Egf => "egf",
        }
    }

    /// Parses a comma-separated list; `all` selects every identity.
    pub fn parse_list(s: &str) -> Result<Vec<Identity>, Error> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                return Ok(Identity::ALL.to_vec());
            }
            let id: Identity = part.parse()?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("no identities selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Identity::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown identity {s:?}")))
    }
}

/// Result of one identity over its range.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub identity: String,
    pub range: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl IdentityOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Runs one identity for every applicable `n ≤ n_max`.
pub fn run_identity(id: Identity, n_max: usize) -> IdentityOutcome {
    let mut t = Tally::new();
    let range = match id {
        Identity::Normalization => {
            for n in 1..=n_max {
                let total: Integer = a_nk_row(n).iter().sum();
                t.check(total == memo::factorial(n), || format!("n={n}"));
            }
            format!("1<=n<={n_max}")
        }
        Identity::NkMoment => {
            for ell in 0..=NK_MAX_ELL {
                for n in ell.max(1)..=n_max {
                    match nk_moment_identity(n, ell) {
                        Ok(v) => t.check(v.holds(), || format!("n={n}, l={ell}")),
                        Err(e) => t.check(false, || format!("n={n}, l={ell}: {e}")),
                    }
                }
            }
            format!("0<=l<={NK_MAX_ELL}, l<=n<={n_max}")
        }
        Identity::ZPolynomial => {
            let top = n_max.min(POLY_MAX_N);
            for n in 1..=top {
                t.check(z_polynomial_identity(n), || format!("n={n}"));
            }
            format!("1<=n<={top}")
        }
        Identity::SPolynomial => {
            let top = n_max.min(POLY_MAX_N);
            for n in 1..=top {
                t.check(s_polynomial_identity(n), || format!("n={n}"));
            }
            format!("1<=n<={top}")
        }
        Identity::SSums => {
            for n in 1..=n_max {
                let ok = s_sum_identities(n).is_ok();
                t.check(ok, || format!("n={n}"));
            }
            format!("1<=n<={n_max}")
        }
        Identity::SBound => {
            for n in S_BOUND_MIN_N..=n_max {
                t.check(s_penultimate_bound_holds(n), || format!("n={n}"));
            }
            format!("{S_BOUND_MIN_N}<=n<={n_max}")
        }
        Identity::Dobinski => {
            let table = bell_stirling(DOBINSKI_MAX_ELL);
            let triangle = bell_by_triangle(DOBINSKI_MAX_ELL + 1);
            for l in 0..=DOBINSKI_MAX_ELL {
                let row_sum: Integer = table.stirling2[l].iter().sum();
                t.check(row_sum == triangle[l], || format!("row sum l={l}"));
                let diff = Integer::from(&triangle[l + 1] - &triangle[l]);
                t.check(table.weighted_row_sum(l) == diff, || format!("m-weighted l={l}"));
            }
            format!("0<=l<={DOBINSKI_MAX_ELL}")
        }
        Identity::AClosedForm => {
            for n in 0..=n_max {
                let ok = a_closed_form(n) == ExactRational::from(memo::a_number(n));
                t.check(ok, || format!("n={n}"));
            }
            format!("0<=n<={n_max}")
        }
        Identity::AFloor => {
            for n in 0..=n_max {
                match a_floor_check(n, 64) {
                    Ok(ok) => t.check(ok, || format!("n={n}")),
                    Err(e) => t.check(false, || format!("n={n}: {e}")),
                }
            }
            format!("0<=n<={n_max}")
        }
        Identity::Egf => {
            let coeffs = egf_coefficients(EGF_TERMS);
            for (n, c) in coeffs.iter().enumerate() {
                let expect = ExactRational::new(memo::a_number(n), memo::factorial(n));
                t.check(*c == expect, || format!("coefficient {n}"));
            }
            format!("0<=n<{EGF_TERMS}")
        }
    };
    IdentityOutcome { identity: id.name().to_string(), range, checks: t.checks, failures: t.failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(Identity::parse_list("all").unwrap().len(), Identity::ALL.len());
        assert_eq!(Identity::parse_list("z-gf, sum1").unwrap(), [Identity::ZPolynomial, Identity::Normalization]);
        assert!(Identity::parse_list("nosuch").is_err());
        assert!(Identity::parse_list("").is_err());
    }

    #[test]
    fn every_identity_passes_small_range() {
        for id in Identity::ALL {
            let out = run_identity(id, 12);
            assert!(out.passed(), "{id}: {:?}", out.failures);
        }
    }
}
