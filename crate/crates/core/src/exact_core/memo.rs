//! Append-only caches shared by every module.

use std::sync::{LazyLock, RwLock};

use rug::Integer;

struct Tables {
    factorial: Vec<Integer>,
    a: Vec<Integer>,
}

impl Tables {
    fn extend_to(&mut self, n_max: usize) {
        while self.factorial.len() <= n_max {
            let n = self.factorial.len();
            let next = Integer::from(&self.factorial[n - 1] * n as u64);
            self.factorial.push(next);
        }
        while self.a.len() <= n_max {
            let n = self.a.len() as u64;
            let next = Integer::from(&self.a[n as usize - 1] * n)
                + Integer::from(&self.a[n as usize - 2] * (n - 1));
            self.a.push(next);
        }
    }
}

static TABLES: LazyLock<RwLock<Tables>> = LazyLock::new(|| {
    RwLock::new(Tables {
        factorial: vec![Integer::from(1)],
        a: vec![Integer::from(1), Integer::from(1)],
    })
});

struct Stirling {
    // rows[l][m] = S(l, m)
    rows: Vec<Vec<Integer>>,
}

impl Stirling {
    fn extend_to(&mut self, l_max: usize) {
        while self.rows.len() <= l_max {
            let prev = self.rows.last().expect("row 0 present");
            let l = prev.len();
            let mut row = vec![Integer::new(); l + 1];
            for m in 1..=l {
                let keep = if m < l { Integer::from(&prev[m] * m as u64) } else { Integer::new() };
                row[m] = keep + &prev[m - 1];
            }
            self.rows.push(row);
        }
    }
}

static STIRLING: LazyLock<RwLock<Stirling>> =
    LazyLock::new(|| RwLock::new(Stirling { rows: vec![vec![Integer::from(1)]] }));

/// Runs `f` with factorials `0!..=n_max!` and `A(0..=n_max)`.
pub fn with_tables<R>(n_max: usize, f: impl FnOnce(&[Integer], &[Integer]) -> R) -> R {
    {
        let guard = TABLES.read().expect("cache lock poisoned");
        if guard.factorial.len() > n_max && guard.a.len() > n_max {
            return f(&guard.factorial[..=n_max], &guard.a[..=n_max]);
        }
    }
    TABLES.write().expect("cache lock poisoned").extend_to(n_max);
    let guard = TABLES.read().expect("cache lock poisoned");
    f(&guard.factorial[..=n_max], &guard.a[..=n_max])
}

pub fn factorial(n: usize) -> Integer {
    with_tables(n, |fact, _| fact[n].clone())
}

/// `A(n)` from the three-term recurrence.
pub fn a_number(n: usize) -> Integer {
    with_tables(n, |_, a| a[n].clone())
}

/// Runs `f` with Stirling rows `S(l, ·)` for `0 ≤ l ≤ l_max`.
pub(crate) fn with_stirling<R>(l_max: usize, f: impl FnOnce(&[Vec<Integer>]) -> R) -> R {
    {
        let guard = STIRLING.read().expect("cache lock poisoned");
        if guard.rows.len() > l_max {
            return f(&guard.rows[..=l_max]);
        }
    }
    STIRLING.write().expect("cache lock poisoned").extend_to(l_max);
    let guard = STIRLING.read().expect("cache lock poisoned");
    f(&guard.rows[..=l_max])
}
