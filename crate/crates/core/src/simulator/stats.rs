//! Goodness-of-fit statistics and normal-approximation diagnostics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use super::SimSummary;
use crate::distribution::TruncatedPmf;
use crate::error::{Error, Result};

/// Pooled bins are grown until their expected count reaches this.
pub const MIN_EXPECTED: f64 = 5.0;
/// Pooled two-sample bins are grown until they hold this many observations.
pub const MIN_POOLED: u64 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    fn new(statistic: f64, df: usize) -> Self {
        let p_value = if df == 0 {
            1.0
        } else {
            let dist = ChiSquared::new(df as f64).expect("positive df");
            dist.sf(statistic)
        };
        ChiSquareResult { statistic, df, p_value }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Pearson statistic of the histogram against `N · P(X_n = m)`.
///
/// The mass beyond `m_max` is folded into the last bin.
pub fn chi_square_vs_pmf(summary: &SimSummary, pmf: &TruncatedPmf) -> Result<ChiSquareResult> {
    if summary.n != pmf.n() {
        return Err(Error::InvalidInput("summary and pmf are for different n".into()));
    }
    if pmf.is_terminal() {
        return Ok(ChiSquareResult::new(0.0, 0));
    }
    let total = summary.count as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for m in 1..=pmf.m_max() {
        obs += summary.histogram.get(&(m as u64)).copied().unwrap_or(0) as f64;
        exp += pmf.prob(m).to_f64() * total;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    obs += summary.histogram.range(pmf.m_max() as u64 + 1..).map(|(_, &c)| c as f64).sum::<f64>();
    exp += pmf.residual().to_f64() * total;
    match bins.last_mut() {
        Some(last) if exp < MIN_EXPECTED => {
            last.0 += obs;
            last.1 += exp;
        }
        _ => bins.push((obs, exp)),
    }
    let stat = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquareResult::new(stat, bins.len().saturating_sub(1)))
}

/// Two-sample chi-square on the union of both histograms.
pub fn chi_square_two_sample(a: &SimSummary, b: &SimSummary) -> Result<ChiSquareResult> {
    if a.count == 0 || b.count == 0 {
        return Err(Error::DegenerateSample);
    }
    let (na, nb) = (a.count as f64, b.count as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut keys: Vec<u64> = a.histogram.keys().chain(b.histogram.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let (mut ca, mut cb) = (0, 0);
    for x in keys {
        ca += a.histogram.get(&x).copied().unwrap_or(0);
        cb += b.histogram.get(&x).copied().unwrap_or(0);
        if ca + cb >= MIN_POOLED {
            bins.push((ca, cb));
            ca = 0;
            cb = 0;
        }
    }
    if ca + cb > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => bins.push((ca, cb)),
        }
    }
    let stat = bins
        .iter()
        .map(|&(x, y)| {
            let d = ka * x as f64 - kb * y as f64;
            d * d / (x + y) as f64
        })
        .sum();
    let df = if a.count == b.count { bins.len().saturating_sub(1) } else { bins.len() };
    Ok(ChiSquareResult::new(stat, df))
}

/// Upper bound on the total variation distance between the histogram and the exact law.
pub fn tv_distance(summary: &SimSummary, pmf: &TruncatedPmf) -> Result<f64> {
    if summary.n != pmf.n() {
        return Err(Error::InvalidInput("summary and pmf are for different n".into()));
    }
    if summary.count == 0 {
        return Err(Error::DegenerateSample);
    }
    if pmf.is_terminal() {
        return Ok(1.0 - summary.frequency(0));
    }
    let mut sum = summary.frequency(0);
    for m in 1..=pmf.m_max() {
        sum += (summary.frequency(m as u64) - pmf.prob(m).to_f64()).abs();
    }
    let beyond: u64 = summary.histogram.range(pmf.m_max() as u64 + 1..).map(|(_, &c)| c).sum();
    sum += beyond as f64 / summary.count as f64 + pmf.residual().to_f64();
    Ok(0.5 * sum)
}

/// Asymptotic Kolmogorov tail `P(D_N > d)` with Stephens' correction.
pub fn kolmogorov_p_value(d: f64, count: u64) -> f64 {
    let sn = (count as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.3 {
        return 1.0;
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        q += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * q).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub count: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `m̂_j = mean(((x - x̄)/s)^j)` for `j = 1..=8`, with `s` the population deviation.
    pub standardized_moments: Vec<f64>,
    pub skewness: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub chi_square: Option<ChiSquareResult>,
    pub mu_hint: f64,
    pub var_hint: f64,
    pub mean_ratio: f64,
    pub var_ratio: f64,
}

struct Standardizer {
    mean: f64,
    sd: f64,
}

impl Standardizer {
    fn new(summary: &SimSummary) -> Result<Self> {
        if summary.count < 2 {
            return Err(Error::DegenerateSample);
        }
        let n = summary.count as f64;
        let mean = summary.histogram.iter().map(|(&x, &c)| x as f64 * c as f64).sum::<f64>() / n;
        let var = summary
            .histogram
            .iter()
            .map(|(&x, &c)| (x as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / n;
        if var <= 0.0 {
            return Err(Error::DegenerateSample);
        }
        Ok(Standardizer { mean, sd: var.sqrt() })
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

/// Standardized moments, KS distance to `Φ` and, if given, a fit to the exact law.
///
/// `mu_hint` and `var_hint` default to `n`.
pub fn clt_report(
    summary: &SimSummary,
    mu_hint: Option<f64>,
    var_hint: Option<f64>,
    pmf: Option<&TruncatedPmf>,
) -> Result<CltReport> {
    let st = Standardizer::new(summary)?;
    let total = summary.count as f64;
    let mut moments = vec![0.0; 8];
    for (&x, &c) in &summary.histogram {
        let z = st.z(x as f64);
        let mut p = c as f64 / total;
        for m in moments.iter_mut() {
            p *= z;
            *m += p;
        }
    }
    let normal = Normal::standard();
    let mut ks: f64 = 0.0;
    let mut below = 0u64;
    for (&x, &c) in &summary.histogram {
        let phi = normal.cdf(st.z(x as f64));
        ks = ks.max((below as f64 / total - phi).abs());
        below += c;
        ks = ks.max((below as f64 / total - phi).abs());
    }
    let chi_square = pmf.map(|p| chi_square_vs_pmf(summary, p)).transpose()?;
    let variance = st.sd * st.sd * total / (total - 1.0);
    let mu_hint = mu_hint.unwrap_or(summary.n as f64);
    let var_hint = var_hint.unwrap_or(summary.n as f64);
    Ok(CltReport {
        n: summary.n,
        count: summary.count,
        mean: st.mean,
        variance,
        skewness: moments[2],
        standardized_moments: moments,
        ks_statistic: ks,
        ks_p_value: kolmogorov_p_value(ks, summary.count),
        chi_square,
        mu_hint,
        var_hint,
        mean_ratio: st.mean / mu_hint,
        var_ratio: variance / var_hint,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotBin {
    pub x: u64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub density: f64,
}

/// Standardized histogram and standard normal density samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub bins: Vec<PlotBin>,
    /// `(z, φ(z))` on `[-5, 5]` in steps of `0.05`.
    pub normal: Vec<(f64, f64)>,
}

pub fn plot_data(summary: &SimSummary) -> Result<PlotData> {
    let st = Standardizer::new(summary)?;
    let total = summary.count as f64;
    let bins = summary
        .histogram
        .iter()
        .map(|(&x, &c)| {
            let (z_lo, z_hi) = (st.z(x as f64 - 0.5), st.z(x as f64 + 0.5));
            PlotBin { x, z_lo, z_hi, density: c as f64 / total / (z_hi - z_lo) }
        })
        .collect();
    let normal = Normal::standard();
    let grid = (0..=200).map(|i| {
        let z = -5.0 + 0.05 * i as f64;
        (z, normal.pdf(z))
    });
    Ok(PlotData { bins, normal: grid.collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{exact_pmf, Truncation};
    use crate::simulator::{run, Backend, SimConfig};
    use crate::Mode;

    #[test]
    fn standardized_moments_by_construction() {
        let s = run(&SimConfig::new(30, 20_000, 4, Backend::SizeChain)).unwrap();
        let r = clt_report(&s, None, None, None).unwrap();
        assert!(r.standardized_moments[0].abs() < 1e-12);
        assert!((r.standardized_moments[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sample_is_an_error() {
        let s = SimSummary::from_values(1, Backend::SizeChain, &[0; 100]);
        assert_eq!(clt_report(&s, None, None, None).unwrap_err(), Error::DegenerateSample);
    }

    #[test]
    fn chi_square_accepts_the_true_law() {
        let s = run(&SimConfig::new(6, 50_000, 11, Backend::SizeChain)).unwrap();
        let p = exact_pmf(6, Truncation::Auto, Mode::Exact).unwrap();
        assert!(!chi_square_vs_pmf(&s, &p).unwrap().rejects(1e-4));
        assert!(tv_distance(&s, &p).unwrap() < 0.02);
    }

    #[test]
    fn chi_square_rejects_a_shifted_law() {
        let s = run(&SimConfig::new(6, 50_000, 11, Backend::SizeChain)).unwrap();
        let shifted: std::collections::BTreeMap<u64, u64> =
            s.histogram.iter().map(|(&x, &c)| (x + 1, c)).collect();
        let t = SimSummary::from_histogram(6, Backend::SizeChain, shifted);
        assert!(chi_square_two_sample(&s, &t).unwrap().rejects(1e-4));
    }

    #[test]
    fn kolmogorov_tail_values() {
        assert_eq!(kolmogorov_p_value(0.0, 100), 1.0);
        // Q(1.36) ≈ 0.049
        let p = kolmogorov_p_value(1.36 / 1e3 - 0.0, 1_000_000);
        assert!((p - 0.049).abs() < 0.002, "{p}");
    }

    #[test]
    fn plot_bins_integrate_to_one() {
        let s = run(&SimConfig::new(20, 5_000, 2, Backend::SizeChain)).unwrap();
        let p = plot_data(&s).unwrap();
        let area: f64 = p.bins.iter().map(|b| b.density * (b.z_hi - b.z_lo)).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(p.normal.len(), 201);
    }
}
