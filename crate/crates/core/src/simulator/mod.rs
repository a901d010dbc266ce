//! Monte Carlo sampling of `X_n` with reproducible, worker-independent streams.
//!
//! Samples are drawn in fixed batches of [`BATCH_SIZE`]. Batch `b` of a run
//! with seed `seed` uses `ChaCha8Rng::seed_from_u64(stream_seed(seed, b))`, so
//! the merged output depends only on `(n, samples, seed, backend)`.

mod backend;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use backend::{
    enumerate_block_counts, merge_blocks, simulate_once_chain, simulate_once_full, ChainSampler,
    CHAIN_MAX_JUMP, LANES,
};
pub use stats::{
    chi_square_two_sample, chi_square_vs_pmf, clt_report, kolmogorov_p_value, plot_data, tv_distance,
    ChiSquareResult, CltReport, PlotData,
};

pub const BATCH_SIZE: u64 = 4096;
/// Number of power sums kept in a [`SimSummary`].
pub const POWER_SUMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    FullPermutation,
    SizeChain,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::FullPermutation => "full_permutation",
            Backend::SizeChain => "size_chain",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "full_permutation" => Ok(Backend::FullPermutation),
            "chain" | "size_chain" => Ok(Backend::SizeChain),
            other => Err(Error::InvalidInput(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub backend: Backend,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(n: usize, samples: u64, seed: u64, backend: Backend) -> Self {
        SimConfig { n, samples, seed, backend, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidInput("samples must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidInput("workers must be positive".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::InvalidInput("n too large".into()));
        }
        Ok(())
    }

    pub fn batches(&self) -> u64 {
        self.samples.div_ceil(BATCH_SIZE)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index`: `splitmix64(splitmix64(seed) ^ index)`.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

/// Mergeable aggregate of simulated values of `X_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSummary {
    pub n: usize,
    pub backend: Backend,
    pub config: Option<SimConfig>,
    pub count: u64,
    pub histogram: BTreeMap<u64, u64>,
    /// `Σ x^j` for `j = 1..=8`.
    #[serde(with = "integer_strings")]
    pub power_sums: Vec<Integer>,
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl SimSummary {
    pub fn empty(n: usize, backend: Backend) -> Self {
        SimSummary {
            n,
            backend,
            config: None,
            count: 0,
            histogram: BTreeMap::new(),
            power_sums: vec![Integer::new(); POWER_SUMS],
            min: None,
            max: None,
        }
    }

    pub fn from_values(n: usize, backend: Backend, values: &[u64]) -> Self {
        let mut hist = BTreeMap::new();
        for &x in values {
            *hist.entry(x).or_insert(0) += 1;
        }
        Self::from_histogram(n, backend, hist)
    }

    pub fn from_histogram(n: usize, backend: Backend, histogram: BTreeMap<u64, u64>) -> Self {
        let mut out = Self::empty(n, backend);
        for (&x, &c) in &histogram {
            let mut p = Integer::from(c);
            for slot in out.power_sums.iter_mut() {
                p *= x;
                *slot += &p;
            }
            out.count += c;
        }
        out.min = histogram.keys().next().copied();
        out.max = histogram.keys().next_back().copied();
        out.histogram = histogram;
        out
    }

    /// Pools two summaries of the same `(n, backend)`.
    pub fn merge(&self, other: &SimSummary) -> Result<SimSummary> {
        if self.n != other.n || self.backend != other.backend {
            return Err(Error::InvalidInput("cannot merge summaries of different runs".into()));
        }
        let mut out = self.clone();
        if out.config != other.config {
            out.config = None;
        }
        out.count += other.count;
        for (&x, &c) in &other.histogram {
            *out.histogram.entry(x).or_insert(0) += c;
        }
        for (a, b) in out.power_sums.iter_mut().zip(&other.power_sums) {
            *a += b;
        }
        out.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        out.max = self.max.max(other.max);
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        self.power_sums[0].to_f64() / self.count as f64
    }

    /// Empirical `P(X = x)`.
    pub fn frequency(&self, x: u64) -> f64 {
        self.histogram.get(&x).copied().unwrap_or(0) as f64 / self.count as f64
    }
}

mod integer_strings {
    use rug::Integer;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| Integer::from_str_radix(s, 10).map_err(D::Error::custom))
            .collect()
    }
}

fn run_batch(config: &SimConfig, chain: Option<&ChainSampler>, batch: u64) -> SimSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, batch));
    let len = BATCH_SIZE.min(config.samples - batch * BATCH_SIZE);
    let mut values = vec![0u64; len as usize];
    match chain {
        Some(c) => c.simulate_many(config.n, &mut rng, &mut values),
        None => values.iter_mut().for_each(|x| *x = simulate_once_full(config.n, &mut rng)),
    }
    let mut hist = BTreeMap::new();
    for x in values {
        *hist.entry(x).or_insert(0) += 1;
    }
    SimSummary::from_histogram(config.n, config.backend, hist)
}

/// Runs the simulation described by `config`.
pub fn run(config: &SimConfig) -> Result<SimSummary> {
    run_with_progress(config, |_, _| {})
}

/// [`run`], calling `progress(done, total)` as batches complete.
pub fn run_with_progress<F>(config: &SimConfig, progress: F) -> Result<SimSummary>
where
    F: Fn(u64, u64) + Sync,
{
    config.validate()?;
    let chain = match config.backend {
        Backend::SizeChain => Some(ChainSampler::new(config.n)),
        Backend::FullPermutation => None,
    };
    let total = config.batches();
    let done = std::sync::atomic::AtomicU64::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let parts: Vec<SimSummary> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|b| {
                let s = run_batch(config, chain.as_ref(), b);
                let d = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(d, total);
                s
            })
            .collect()
    });
    let mut out = SimSummary::empty(config.n, config.backend);
    for p in &parts {
        out = out.merge(p)?;
    }
    out.config = Some(config.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_rejected() {
        let c = SimConfig::new(5, 0, 1, Backend::SizeChain);
        assert!(matches!(run(&c), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn worker_count_does_not_matter() {
        for backend in [Backend::SizeChain, Backend::FullPermutation] {
            let c = SimConfig::new(12, 3 * BATCH_SIZE + 17, 99, backend);
            let one = run(&c).unwrap();
            let four = run(&c.clone().with_workers(4)).unwrap();
            assert_eq!(one.histogram, four.histogram);
            assert_eq!(one.power_sums, four.power_sums);
        }
    }

    #[test]
    fn two_has_mean_two() {
        let s = run(&SimConfig::new(2, 100_000, 5, Backend::FullPermutation)).unwrap();
        assert!((s.mean() - 2.0).abs() < 0.03);
        assert_eq!(s.min, Some(1));
    }

    #[test]
    fn one_is_always_zero() {
        let s = run(&SimConfig::new(1, 10, 5, Backend::SizeChain)).unwrap();
        assert_eq!(s.histogram, BTreeMap::from([(0, 10)]));
    }

    #[test]
    fn summary_round_trips_through_json() {
        let s = run(&SimConfig::new(6, 500, 3, Backend::SizeChain)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: SimSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn backend_names() {
        assert_eq!("chain".parse::<Backend>().unwrap(), Backend::SizeChain);
        assert_eq!("full_permutation".parse::<Backend>().unwrap(), Backend::FullPermutation);
        assert!("x".parse::<Backend>().is_err());
    }
}
