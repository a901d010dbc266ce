//! The two samplers of `X_s`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::exact_core::prob_row::block_count_unchecked;

/// Largest jump `d = s - k` tabulated for the size chain.
///
/// `P(Y_s = s - d) ≤ 1/d!`, so the untabulated mass is below `1/41!`.
pub const CHAIN_MAX_JUMP: usize = 40;

/// Merges every block of consecutive integers into its first element and
/// relabels the survivors to `1..=k` preserving their order of values.
pub fn merge_blocks(perm: &[u32]) -> Vec<u32> {
    let s = perm.len();
    let mut keep = Vec::with_capacity(s);
    for (i, &v) in perm.iter().enumerate() {
        if i == 0 || v != perm[i - 1] + 1 {
            keep.push(v);
        }
    }
    let mut rank = vec![0u32; s + 1];
    for &v in &keep {
        rank[v as usize] = 1;
    }
    let mut next = 0;
    for r in rank.iter_mut() {
        if *r == 1 {
            next += 1;
            *r = next;
        }
    }
    keep.iter().map(|&v| rank[v as usize]).collect()
}

/// Shuffles, merges and relabels until one element remains.
pub fn simulate_once_full<R: Rng + ?Sized>(s: usize, rng: &mut R) -> u64 {
    let mut perm: Vec<u32> = (1..=s as u32).collect();
    let mut count = 0;
    while perm.len() > 1 {
        perm.shuffle(rng);
        let blocks = block_count_unchecked(&perm);
        perm = merge_blocks(&perm);
        debug_assert_eq!(perm.len(), blocks);
        count += 1;
    }
    count
}

/// Jumps resolved by the branch-free fast path of [`ChainSampler::next_size`].
const FAST: usize = 8;

/// Cumulative jump tables of the size chain for every size up to `n_max`.
///
/// `P(Y_s = s - d) = a_{s-d-1} / (s · d!)` with `a_j = A(j)/j!`. Tables hold
/// `⌊2^64 · P(Y_s ≥ s - d)⌋`, with the last tabulated entry forced to `u64::MAX`.
#[derive(Clone, Debug)]
pub struct ChainSampler {
    offsets: Vec<usize>,
    thresholds: Vec<u64>,
    fast: Vec<[u64; FAST]>,
}

impl ChainSampler {
    pub fn new(n_max: usize) -> Self {
        let mut a = vec![1.0f64; n_max.max(2)];
        for j in 2..a.len() {
            a[j] = a[j - 1] + a[j - 2] / j as f64;
        }
        let mut inv_fact = vec![1.0f64; CHAIN_MAX_JUMP + 1];
        for d in 1..=CHAIN_MAX_JUMP {
            inv_fact[d] = inv_fact[d - 1] / d as f64;
        }
        let scale = 2f64.powi(64);
        let mut offsets = vec![0; n_max + 2];
        let mut thresholds = Vec::new();
        let mut fast = vec![[u64::MAX; FAST]; n_max + 1];
        for s in 0..=n_max {
            offsets[s] = thresholds.len();
            if s >= 2 {
                let top = (s - 1).min(CHAIN_MAX_JUMP);
                let mut acc = 0.0;
                for d in 0..=top {
                    acc += a[s - d - 1] * inv_fact[d] / s as f64;
                    let t = if d == top { u64::MAX } else { (acc * scale) as u64 };
                    thresholds.push(t);
                    if d < FAST {
                        fast[s][d] = t;
                    }
                }
            }
        }
        offsets[n_max + 1] = thresholds.len();
        ChainSampler { offsets, thresholds, fast }
    }

    pub fn n_max(&self) -> usize {
        self.offsets.len() - 2
    }

    /// Cumulative `P(s - d ≤ Y_s ≤ s)` for tabulated `d`.
    pub fn table(&self, s: usize) -> Vec<f64> {
        let scale = 2f64.powi(-64);
        self.thresholds[self.offsets[s]..self.offsets[s + 1]]
            .iter()
            .map(|&t| if t == u64::MAX { 1.0 } else { t as f64 * scale })
            .collect()
    }

    /// Draws `Y_s` by inverse CDF over the jump size.
    #[inline]
    pub fn next_size<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let u = rng.next_u64();
        let f = &self.fast[s];
        let d: usize = f.iter().map(|&t| (u >= t) as usize).sum();
        if d < FAST {
            return s - d;
        }
        let t = &self.thresholds[self.offsets[s]..self.offsets[s + 1]];
        s - (FAST + t[FAST..].iter().position(|&c| u < c).unwrap_or(t.len() - 1 - FAST))
    }

    /// Runs the size chain from `s` down to 1.
    pub fn simulate_once<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> u64 {
        assert!(s <= self.n_max(), "size {s} beyond table {}", self.n_max());
        let mut s = s;
        let mut count = 0;
        while s > 1 {
            s = self.next_size(s, rng);
            count += 1;
        }
        count
    }

    /// Fills `out` with independent draws of `X_s`, advancing [`LANES`]
    /// trajectories in lockstep.
    pub fn simulate_many<R: Rng + ?Sized>(&self, s: usize, rng: &mut R, out: &mut [u64]) {
        assert!(s <= self.n_max(), "size {s} beyond table {}", self.n_max());
        for chunk in out.chunks_mut(LANES) {
            let mut size = [1usize; LANES];
            let mut count = [0u64; LANES];
            size[..chunk.len()].fill(s);
            while size.iter().any(|&x| x > 1) {
                for lane in 0..LANES {
                    if size[lane] > 1 {
                        size[lane] = self.next_size(size[lane], rng);
                        count[lane] += 1;
                    }
                }
            }
            chunk.copy_from_slice(&count[..chunk.len()]);
        }
    }
}

/// Trajectories interleaved by [`ChainSampler::simulate_many`].
pub const LANES: usize = 8;

/// One draw of `X_s` through the size chain, building tables on the fly.
pub fn simulate_once_chain<R: Rng + ?Sized>(s: usize, rng: &mut R) -> u64 {
    ChainSampler::new(s).simulate_once(s, rng)
}

/// Block-count frequencies over all `s!` permutations of `[s]`, indexed by `k - 1`.
pub fn enumerate_block_counts(s: usize) -> Vec<u64> {
    assert!((1..=10).contains(&s), "enumeration limited to s <= 10");
    let mut perm: Vec<u32> = (1..=s as u32).collect();
    let mut counts = vec![0u64; s];
    // Heap's algorithm.
    let mut c = vec![0usize; s];
    counts[block_count_unchecked(&perm) - 1] += 1;
    let mut i = 0;
    while i < s {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            counts[block_count_unchecked(&perm) - 1] += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    counts
}
