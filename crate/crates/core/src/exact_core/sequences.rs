use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound};
use rug::{Float, Integer};

use super::memo;
use super::number::ExactRational;
use crate::error::{Error, Result};

/// Precision cap for [`a_floor_check`].
pub const FLOOR_CHECK_MAX_BITS: u32 = 16384;

/// `A(0..=n_max)` by the recurrence, each entry cross-checked against the
/// alternating-sum closed form.
///
/// # Panics
/// Panics if the two evaluations ever disagree.
pub fn a_sequence(n_max: usize) -> Vec<Integer> {
    let seq = memo::with_tables(n_max, |_, a| a.to_vec());
    for (n, value) in seq.iter().enumerate() {
        let closed = a_closed_form(n);
        assert!(
            closed == ExactRational::from(value),
            "A({n}) recurrence {value} differs from closed form {closed}"
        );
    }
    seq
}

/// `(n+2)!/(n+1) · Σ_{i=0}^{n+2} (-1)^i / i!` in exact rationals.
pub fn a_closed_form(n: usize) -> ExactRational {
    let mut inv_fact = ExactRational::one();
    let mut sum = ExactRational::one();
    for i in 1..=n + 2 {
        inv_fact = inv_fact / ExactRational::from(i as i64);
        if i % 2 == 0 {
            sum += &inv_fact;
        } else {
            sum -= &inv_fact;
        }
    }
    let scale = ExactRational::new(memo::factorial(n + 2), (n + 1) as u64);
    scale * sum
}

/// `A(n, k) = C(n-1, k-1) A(k-1)` for `k = 1..=n`, stored at index `k - 1`.
pub fn a_nk_row(n: usize) -> Vec<Integer> {
    assert!(n >= 1, "row index must be positive");
    memo::with_tables(n, |_, a| {
        let mut row = Vec::with_capacity(n);
        let mut binom = Integer::from(1);
        for k in 1..=n {
            if k > 1 {
                binom *= (n - k + 1) as u64;
                binom.div_exact_u_mut((k - 1) as u32);
            }
            row.push(Integer::from(&binom * &a[k - 1]));
        }
        row
    })
}

/// Checks `A(n) = ⌊(n+2) n!/e + 1/2⌋` with interval arithmetic, doubling the
/// working precision until the floor is certain or the cap is reached.
pub fn a_floor_check(n: usize, bits: u32) -> Result<bool> {
    a_floor_check_capped(n, bits, FLOOR_CHECK_MAX_BITS)
}

pub fn a_floor_check_capped(n: usize, bits: u32, cap: u32) -> Result<bool> {
    let scale = Integer::from(memo::factorial(n) * (n as u64 + 2));
    let expected = memo::a_number(n);
    let mut prec = bits.max(32);
    loop {
        let (lo, hi) = floor_interval(&scale, prec);
        if lo == hi {
            return Ok(lo == expected);
        }
        if prec >= cap {
            return Err(Error::Indeterminate { bits: prec });
        }
        prec = (prec * 2).min(cap);
    }
}

/// Floors of certified lower and upper bounds for `scale/e + 1/2`.
fn floor_interval(scale: &Integer, prec: u32) -> (Integer, Integer) {
    let bound = |round: Round, opposite: Round| {
        // 1/e rounded in direction `round` needs e rounded the other way.
        let one = Float::with_val(prec, 1);
        let (mut e, _) = Float::with_val_round(prec, &one, opposite);
        e.exp_round(opposite);
        let (mut x, _) = Float::with_val_round(prec, scale, round);
        x.div_assign_round(&e, round);
        let half = Float::with_val(prec, 0.5);
        x.add_assign_round(&half, round);
        let (fl, _) = x.to_integer_round(Round::Down).expect("finite value");
        fl
    };
    (bound(Round::Down, Round::Up), bound(Round::Up, Round::Down))
}
