//! Independent oracles built from brute-force enumeration.

use blockmerge::distribution::{exact_pmf, pmf_moments, tail_bound, Truncation};
use blockmerge::exact_core::{bell_stirling, block_count, prob_row};
use blockmerge::recurrence::{central_moments, mean_values, raw_moments};
use blockmerge::{ExactRational, Mode, Number};
use rug::{Integer, Rational};

fn permutations(s: usize) -> Vec<Vec<u32>> {
    if s == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(s - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, s as u32);
            out.push(q);
        }
    }
    out
}

/// `q[s][k]` by counting block counts over all permutations of `[s]`.
fn brute_rows(s_max: usize) -> Vec<Vec<Rational>> {
    let mut rows = vec![Vec::new(), vec![Rational::new(), Rational::from(1)]];
    for s in 2..=s_max {
        let perms = permutations(s);
        let mut counts = vec![0u64; s + 1];
        for p in &perms {
            counts[block_count(p).unwrap()] += 1;
        }
        rows.push(counts.iter().map(|&c| Rational::from((c, perms.len() as u64))).collect());
    }
    rows
}

fn exact(n: &Number) -> Rational {
    n.as_exact().expect("exact").as_rational().clone()
}

fn binom(n: usize, k: usize) -> Integer {
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

/// `E[X_s^j]` by first-step analysis on the brute-force rows.
fn first_step_moments(rows: &[Vec<Rational>], order: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = vec![vec![Rational::new(); order + 1]; rows.len()];
    m[1][0] = Rational::from(1);
    for s in 2..rows.len() {
        m[s][0] = Rational::from(1);
        let stay = rows[s][s].clone();
        for j in 1..=order {
            let mut rhs = Rational::new();
            for k in 1..s {
                for i in 0..=j {
                    rhs += Rational::from(&rows[s][k] * &m[k][i]) * binom(j, i);
                }
            }
            for i in 0..j {
                rhs += Rational::from(&stay * &m[s][i]) * binom(j, i);
            }
            m[s][j] = rhs / (Rational::from(1) - &stay);
        }
    }
    m
}

#[test]
fn block_count_rows_match_enumeration() {
    let rows = brute_rows(8);
    for s in 1..=8 {
        let row = prob_row(s);
        for k in 1..=s {
            assert_eq!(row.prob(k).as_rational(), &rows[s][k], "s={s} k={k}");
        }
    }
}

#[test]
fn raw_moments_match_first_step_analysis() {
    let rows = brute_rows(7);
    let oracle = first_step_moments(&rows, 4);
    let table = raw_moments(7, 4, Mode::Exact).unwrap();
    for s in 1..=7 {
        for j in 1..=4 {
            assert_eq!(exact(&table.raw(s, j)), oracle[s][j], "s={s} j={j}");
        }
    }
}

#[test]
fn small_anchors() {
    let means = mean_values(3, Mode::Exact).unwrap();
    assert_eq!(exact(&means.mu(1)), Rational::new());
    assert_eq!(exact(&means.mu(2)), Rational::from(2));
    assert_eq!(exact(&means.mu(3)), Rational::from((10, 3)));
    let c = central_moments(2, 2, Mode::Exact).unwrap();
    assert_eq!(exact(&c.central(2, 2)), Rational::from(2));
    // geometric(1/2) on {1, 2, ...}: E[X^j] = 2, 6, 26, 150
    let t = raw_moments(2, 4, Mode::Exact).unwrap();
    for (j, want) in [(1, 2), (2, 6), (3, 26), (4, 150)] {
        assert_eq!(exact(&t.raw(2, j)), Rational::from(want));
    }
}

/// `P(X_n = m)` by listing every size path `n = s_0 > ... ` that first hits 1 at step `m`.
fn path_probability(rows: &[Vec<Rational>], s: usize, steps: usize) -> Rational {
    if s == 1 {
        return if steps == 0 { Rational::from(1) } else { Rational::new() };
    }
    if steps == 0 {
        return Rational::new();
    }
    let mut total = Rational::new();
    for k in 1..=s {
        let tail = path_probability(rows, k, steps - 1);
        total += Rational::from(&rows[s][k] * &tail);
    }
    total
}

#[test]
fn pmf_matches_path_enumeration() {
    let rows = brute_rows(5);
    for n in 2..=5 {
        let pmf = exact_pmf(n, Truncation::Fixed(6), Mode::Exact).unwrap();
        let mut total = Rational::new();
        for m in 1..=6 {
            let want = path_probability(&rows, n, m);
            assert_eq!(exact(&pmf.prob(m)), want, "n={n} m={m}");
            total += want;
        }
        assert_eq!(exact(&pmf.residual()), Rational::from(1) - total);
    }
}

#[test]
fn pmf_intervals_contain_moments() {
    let table = raw_moments(12, 4, Mode::Exact).unwrap();
    for n in 2..=12 {
        let pmf = exact_pmf(n, Truncation::Auto, Mode::Exact).unwrap();
        for iv in pmf_moments(&pmf, 4).unwrap() {
            assert!(iv.contains(&table.raw(n, iv.j)), "n={n} j={}", iv.j);
        }
    }
}

#[test]
fn tail_bound_dominates_residual() {
    for n in 2..=12 {
        for m in [n, n + 5, 3 * n, 10 * n] {
            let pmf = exact_pmf(n, Truncation::Fixed(m), Mode::Exact).unwrap();
            let res = pmf.residual().as_exact().unwrap().clone();
            assert!(res <= tail_bound(n, m).unwrap(), "n={n} m={m}");
        }
    }
}

#[test]
fn bell_numbers_count_set_partitions() {
    fn partitions(l: usize) -> Integer {
        // restricted growth strings
        fn go(i: usize, l: usize, max: usize) -> u64 {
            if i == l {
                return 1;
            }
            (0..=max + 1).map(|v| go(i + 1, l, max.max(v))).sum()
        }
        if l == 0 {
            Integer::from(1)
        } else {
            Integer::from(go(1, l, 0))
        }
    }
    let table = bell_stirling(10);
    for l in 0..=10 {
        assert_eq!(table.bell[l], partitions(l), "l={l}");
    }
}

#[test]
fn pmf_mean_is_two_for_size_two() {
    let pmf = exact_pmf(2, Truncation::Fixed(200), Mode::Exact).unwrap();
    let iv = &pmf_moments(&pmf, 1).unwrap()[0];
    assert!(iv.contains(&Number::Exact(ExactRational::from(2))));
}
