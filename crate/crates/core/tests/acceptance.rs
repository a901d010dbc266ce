//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use blockmerge::distribution::{exact_pmf, pmf_moments, Truncation};
use blockmerge::exact_core::suite::{run_identity, Identity};
use blockmerge::exact_core::{a_nk_row, block_count, prob_row};
use blockmerge::recurrence::{
    bell_hit_identity, central_moments, eps_mean_diagnostics, mean_values, rao_bound_failures,
    raw_moments, weighted_moment_report,
};
use blockmerge::simulator::{
    chi_square_two_sample, clt_report, enumerate_block_counts, run, tv_distance, Backend,
    ChiSquareResult, SimConfig,
};
use blockmerge::{Mode, Number};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const AC1_BUDGET: Duration = Duration::from_secs(120);
const AC1_NK_N_MAX: usize = 200;
const AC1_POLY_N_MAX: usize = 50;
const AC1_SSUM_N_MAX: usize = 200;
const AC1_CLOSED_FORM_N_MAX: usize = 100;

const AC2_S_BOUND_RANGE: (usize, usize) = (200, 1000);
const AC2_EPS_N_MAX: usize = 200;
const AC2_RAO_N_MAX: usize = 300;

const AC4_N_MAX: usize = 120;
const AC4_ORDER: usize = 8;

const AC5_BUDGET: Duration = Duration::from_secs(600);
const AC5_BITS: u32 = 256;
const AC5_N: usize = 400;
const AC5_VAR_TOL: f64 = 0.05;
const AC5_THIRD_TOL: f64 = 0.10;
const AC5_FOURTH_TOL: f64 = 0.10;

const AC6_RANGE: (usize, usize) = (10, 300);
const AC6_MAX_ELL: u32 = 4;
const AC6_SCALED_CAP: f64 = 40.0;
const AC6_WINDOW: usize = 50;
/// Rounding slack when comparing the last window against the first.
const AC6_GROWTH_SLACK: f64 = 1e-9;

const AC7_N_MAX: usize = 12;
const AC7_ORDER: usize = 4;
const AC7_PATH_N_MAX: usize = 5;
const AC7_PATH_M_MAX: usize = 6;

const AC8_ENUM_S_MAX: usize = 8;
const AC8_ALPHA: f64 = 1e-4;
const AC8_SEEDS: u64 = 20;
const AC8_SIZES: [usize; 4] = [3, 5, 10, 25];
const AC8_SAMPLES: u64 = 100_000;
const AC8_BLOCK_SIZES: [usize; 4] = [10, 25, 50, 100];
const AC8_TV_N: usize = 10;
const AC8_TV_SAMPLES: u64 = 1_000_000;
const AC8_TV_SEED: u64 = 7;
const AC8_TV_MAX: f64 = 0.005;
const AC8_WORKERS: [usize; 2] = [1, 4];

const AC9_SEEDS: u64 = 10;
const AC9_SAMPLES: u64 = 200_000;
const AC9_SIZES: [usize; 3] = [100, 1_000, 10_000];
const AC9_KS_MAX: f64 = 0.05;
const AC9_SKEW_BAND: (f64, f64) = (-0.005, 0.045);

type Outcome = (bool, String);

fn exact(v: &Number) -> Rational {
    v.as_exact().expect("exact value").as_rational().clone()
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let runs = [
        (Identity::Normalization, AC1_NK_N_MAX),
        (Identity::NkMoment, AC1_NK_N_MAX),
        (Identity::ZPolynomial, AC1_POLY_N_MAX),
        (Identity::SPolynomial, AC1_POLY_N_MAX),
        (Identity::SSums, AC1_SSUM_N_MAX),
        (Identity::Dobinski, 0),
        (Identity::AClosedForm, AC1_CLOSED_FORM_N_MAX),
    ];
    let mut checks = 0;
    let mut failed = Vec::new();
    for (id, n_max) in runs {
        let out = run_identity(id, n_max);
        checks += out.checks;
        if !out.passed() {
            failed.push(format!("{}: {:?}", out.identity, out.failures));
        }
    }
    let elapsed = start.elapsed();
    let ok = failed.is_empty() && elapsed < AC1_BUDGET;
    (ok, format!("{checks} exact checks, {} failed, {:.1?} (budget {:?}) {}", failed.len(), elapsed, AC1_BUDGET, failed.join("; ")))
}

fn ac2() -> Outcome {
    let (lo, hi) = AC2_S_BOUND_RANGE;
    let s = run_identity(Identity::SBound, hi);
    let eps = eps_mean_diagnostics(&mean_values(AC2_EPS_N_MAX + 1, Mode::Exact).unwrap()).unwrap();
    let rao = rao_bound_failures(&mean_values(AC2_RAO_N_MAX, Mode::Exact).unwrap()).unwrap();
    let ok = s.passed() && s.checks == hi - lo + 1 && eps.holds() && eps.checked_through == AC2_EPS_N_MAX && rao.is_empty();
    (
        ok,
        format!(
            "S_n(n-1) bound {}/{} ok; eps differences checked 2..={} failures {:?}; mean sandwich failures {:?}",
            s.checks - s.failures.len(),
            s.checks,
            eps.checked_through,
            eps.failures,
            rao
        ),
    )
}

fn ac3() -> Outcome {
    let t = central_moments(3, 4, Mode::Exact).unwrap();
    let mut bad = Vec::new();
    let mut want = |what: &str, got: Rational, expect: Rational| {
        if got != expect {
            bad.push(format!("{what}={got} want {expect}"));
        }
    };
    want("mu2", exact(&t.mu(2)), Rational::from(2));
    want("var2", exact(&t.central(2, 2)), Rational::from(2));
    want("mu3", exact(&t.mu(3)), Rational::from((10, 3)));
    // geometric(1/2) on {1, 2, ...}: E[X^j] = 2 · (ordered Bell number j)
    for (j, e) in [(1, 2), (2, 6), (3, 26), (4, 150)] {
        want(&format!("E[X_2^{j}]"), exact(&t.raw(2, j)), Rational::from(e));
    }
    (bad.is_empty(), if bad.is_empty() { "all anchors exact".into() } else { bad.join(", ") })
}

fn ac4() -> Outcome {
    let start = Instant::now();
    match central_moments(AC4_N_MAX, AC4_ORDER, Mode::Exact) {
        Ok(t) => (
            t.routes_checked(),
            format!("n<={AC4_N_MAX}, m<={AC4_ORDER}, routes agree exactly, {:.1?}", start.elapsed()),
        ),
        Err(e) => (false, format!("route mismatch: {e}")),
    }
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let t = central_moments(AC5_N, 4, Mode::BigFloat(AC5_BITS)).unwrap();
    let n = AC5_N as f64;
    let ratio = |m: usize, main: f64| t.central_float(AC5_N, m, AC5_BITS).to_f64() / main;
    let r2 = ratio(2, n);
    let r3 = ratio(3, 2.0 * n);
    let r4 = ratio(4, 3.0 * n * n);
    let elapsed = start.elapsed();
    let ok = (r2 - 1.0).abs() < AC5_VAR_TOL
        && (r3 - 1.0).abs() < AC5_THIRD_TOL
        && (r4 - 1.0).abs() < AC5_FOURTH_TOL
        && elapsed < AC5_BUDGET;
    (
        ok,
        format!(
            "n={AC5_N}: Var/n={r2:.4} (tol {AC5_VAR_TOL}), m3/2n={r3:.4} (tol {AC5_THIRD_TOL}), m4/3n^2={r4:.4} (tol {AC5_FOURTH_TOL}), {elapsed:.1?}"
        ),
    )
}

fn ac6() -> Outcome {
    let (lo, hi) = AC6_RANGE;
    let float = mean_values(hi, Mode::BigFloat(256)).unwrap();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for total in 0..=AC6_MAX_ELL {
        for l1 in 0..=total {
            let r = weighted_moment_report(&float, l1, total - l1, lo, hi).unwrap();
            let head = r.scaled_err[..AC6_WINDOW].iter().cloned().fold(0.0, f64::max);
            let tail = r.scaled_err[r.scaled_err.len() - AC6_WINDOW..].iter().cloned().fold(0.0, f64::max);
            worst = worst.max(r.sup_scaled_err());
            if r.sup_scaled_err() >= AC6_SCALED_CAP || tail > head + AC6_GROWTH_SLACK {
                bad.push(format!("({l1},{})", total - l1));
            }
        }
    }
    let exact_means = mean_values(hi, Mode::Exact).unwrap();
    let hit_failures: Vec<usize> = (2..=hi).filter(|&n| !bell_hit_identity(&exact_means, n).unwrap()).collect();
    let ok = bad.is_empty() && hit_failures.is_empty();
    (
        ok,
        format!(
            "sup n|err| = {worst:.3} < {AC6_SCALED_CAP} over {lo}..={hi}, unbounded pairs {bad:?}; exact hit identity failures {hit_failures:?}"
        ),
    )
}

/// `P(X_n = m)` by listing size paths, with transition counts from permutation enumeration.
fn path_probability(rows: &[Vec<Rational>], s: usize, steps: usize) -> Rational {
    if s == 1 {
        return Rational::from(u32::from(steps == 0));
    }
    if steps == 0 {
        return Rational::new();
    }
    (1..=s).map(|k| Rational::from(&rows[s][k] * &path_probability(rows, k, steps - 1))).sum()
}

fn ac7() -> Outcome {
    let table = raw_moments(AC7_N_MAX, AC7_ORDER, Mode::Exact).unwrap();
    let mut outside = Vec::new();
    let mut widest: f64 = 0.0;
    for n in 2..=AC7_N_MAX {
        let pmf = exact_pmf(n, Truncation::Auto, Mode::Exact).unwrap();
        for iv in pmf_moments(&pmf, AC7_ORDER).unwrap() {
            widest = widest.max(iv.width());
            if !iv.contains(&table.raw(n, iv.j)) {
                outside.push((n, iv.j));
            }
        }
    }
    let mut rows = vec![Vec::new(), vec![Rational::new(), Rational::from(1)]];
    for s in 2..=AC7_PATH_N_MAX {
        let counts = enumerate_block_counts(s);
        let total: u64 = counts.iter().sum();
        let mut row = vec![Rational::new()];
        row.extend(counts.iter().map(|&c| Rational::from((c, total))));
        rows.push(row);
    }
    let mut mismatches = Vec::new();
    for n in 2..=AC7_PATH_N_MAX {
        let pmf = exact_pmf(n, Truncation::Fixed(AC7_PATH_M_MAX), Mode::Exact).unwrap();
        for m in 1..=AC7_PATH_M_MAX {
            if exact(&pmf.prob(m)) != path_probability(&rows, n, m) {
                mismatches.push((n, m));
            }
        }
    }
    let ok = outside.is_empty() && mismatches.is_empty();
    (
        ok,
        format!(
            "intervals n<={AC7_N_MAX}, j<={AC7_ORDER} missing {outside:?} (widest {widest:.1e}); path enumeration n<={AC7_PATH_N_MAX}, m<={AC7_PATH_M_MAX} mismatches {mismatches:?}"
        ),
    )
}

fn block_count_chi_square(s: usize, samples: u64, seed: u64) -> ChiSquareResult {
    let row = prob_row(s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (1..=s as u32).collect();
    let mut counts = vec![0u64; s + 1];
    for _ in 0..samples {
        perm.shuffle(&mut rng);
        counts[block_count(&perm).unwrap()] += 1;
    }
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 1..=s {
        obs += counts[k] as f64;
        exp += row.prob(k).to_f64() * samples as f64;
        if exp >= 5.0 || k == s {
            stat += (obs - exp) * (obs - exp) / exp;
            bins += 1;
            obs = 0.0;
            exp = 0.0;
        }
    }
    let df = bins - 1;
    let p_value = ChiSquared::new(df as f64).unwrap().sf(stat);
    ChiSquareResult { statistic: stat, df, p_value }
}

fn ac8() -> Outcome {
    let enum_bad: Vec<usize> = (1..=AC8_ENUM_S_MAX)
        .filter(|&s| {
            let want: Vec<u64> = a_nk_row(s).iter().map(|c| c.to_u64().unwrap()).collect();
            enumerate_block_counts(s) != want
        })
        .collect();
    let block_rejects: Vec<usize> = AC8_BLOCK_SIZES
        .into_iter()
        .filter(|&s| block_count_chi_square(s, AC8_SAMPLES, s as u64).rejects(AC8_ALPHA))
        .collect();
    let mut rejects = Vec::new();
    let mut min_p: f64 = 1.0;
    for n in AC8_SIZES {
        for seed in 1..=AC8_SEEDS {
            let full = run(&SimConfig::new(n, AC8_SAMPLES, seed, Backend::FullPermutation)).unwrap();
            let chain = run(&SimConfig::new(n, AC8_SAMPLES, seed + 1000, Backend::SizeChain)).unwrap();
            let r = chi_square_two_sample(&full, &chain).unwrap();
            min_p = min_p.min(r.p_value);
            if r.rejects(AC8_ALPHA) {
                rejects.push((n, seed));
            }
        }
    }
    let tv_run = run(&SimConfig::new(AC8_TV_N, AC8_TV_SAMPLES, AC8_TV_SEED, Backend::SizeChain)).unwrap();
    let pmf = exact_pmf(AC8_TV_N, Truncation::Auto, Mode::Exact).unwrap();
    let tv = tv_distance(&tv_run, &pmf).unwrap();
    let mut invariant = true;
    for backend in [Backend::FullPermutation, Backend::SizeChain] {
        let base = SimConfig::new(25, 50_000, 3, backend);
        let outs: Vec<_> =
            AC8_WORKERS.iter().map(|&w| run(&base.clone().with_workers(w)).unwrap()).collect();
        invariant &= outs.windows(2).all(|w| w[0].histogram == w[1].histogram && w[0].power_sums == w[1].power_sums);
    }
    let ok = enum_bad.is_empty() && block_rejects.is_empty() && rejects.is_empty() && tv < AC8_TV_MAX && invariant;
    (
        ok,
        format!(
            "enumeration s<={AC8_ENUM_S_MAX} mismatches {enum_bad:?}; block-count chi-square rejects {block_rejects:?}; \
             backend rejects {rejects:?} at alpha={AC8_ALPHA} (min p {min_p:.2e}); TV n={AC8_TV_N} = {tv:.5} < {AC8_TV_MAX}; worker invariant {invariant}"
        ),
    )
}

fn ac9() -> Outcome {
    let mut decreasing = 0;
    let mut ks_fail = Vec::new();
    let mut skew_fail = Vec::new();
    let mut ks_top: f64 = 0.0;
    let (mut skew_lo, mut skew_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 1..=AC9_SEEDS {
        let ks: Vec<f64> = AC9_SIZES
            .iter()
            .map(|&n| {
                let s = run(&SimConfig::new(n, AC9_SAMPLES, seed, Backend::SizeChain)).unwrap();
                let r = clt_report(&s, None, None, None).unwrap();
                if n == AC9_SIZES[2] {
                    skew_lo = skew_lo.min(r.skewness);
                    skew_hi = skew_hi.max(r.skewness);
                    if !(AC9_SKEW_BAND.0..=AC9_SKEW_BAND.1).contains(&r.skewness) {
                        skew_fail.push(seed);
                    }
                }
                r.ks_statistic
            })
            .collect();
        if ks.windows(2).all(|w| w[1] < w[0]) {
            decreasing += 1;
        }
        ks_top = ks_top.max(ks[2]);
        if ks[2] >= AC9_KS_MAX {
            ks_fail.push(seed);
        }
    }
    let ok = ks_fail.is_empty() && 2 * decreasing > AC9_SEEDS as usize && skew_fail.is_empty();
    (
        ok,
        format!(
            "max KS at n=1e4 {ks_top:.4} < {AC9_KS_MAX}; KS decreasing for {decreasing}/{AC9_SEEDS} seeds; \
             skewness in [{skew_lo:.4}, {skew_hi:.4}] vs band {AC9_SKEW_BAND:?}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "exact identity suite", ac1),
        ("AC2", "finite bounds", ac2),
        ("AC3", "moment anchors", ac3),
        ("AC4", "central moment route equivalence", ac4),
        ("AC5", "large-n central moment laws", ac5),
        ("AC6", "Bell convergence", ac6),
        ("AC7", "distribution oracle", ac7),
        ("AC8", "simulator statistical suite", ac8),
        ("AC9", "CLT diagnostic", ac9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let mut all = true;
    for (tag, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == tag) {
            continue;
        }
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        all &= ok;
        println!("{tag} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
