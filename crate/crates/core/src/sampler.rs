//! Monte Carlo draws of `X_n` through the subproblem-size process.
//!
//! Sample `i` of a batch uses its own ChaCha8 stream (`seed`, stream `i`),
//! and statistics are reduced over fixed-size chunks in a fixed tree, so a
//! batch is bitwise reproducible whatever the thread count.

use std::io::Write;
use std::sync::OnceLock;

use num_traits::ToPrimitive;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactdist::{exact_pmf_table, ArithMode, PmfCaps};
use crate::specfun;

/// Identifies the generator in reports.
pub const GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.3), seed_from_u64(seed), stream = sample index; direct draws for m <= 20";

const CHUNK: usize = 1024;

/// Largest subproblem drawn in one step from its exact law (`20! < 2^64`).
pub const DIRECT_MAX: u64 = 20;

/// Cumulative permutation counts of `X_m` for `m ≤ DIRECT_MAX`.
struct SmallLaws {
    offsets: Vec<u64>,
    cumulative: Vec<Vec<u64>>,
}

fn small_laws() -> &'static SmallLaws {
    static LAWS: OnceLock<SmallLaws> = OnceLock::new();
    LAWS.get_or_init(|| {
        let caps = PmfCaps { rational: DIRECT_MAX as usize, float: 0 };
        let table = exact_pmf_table(DIRECT_MAX as usize, ArithMode::Rational, caps)
            .expect("within cap");
        let offsets = table.iter().map(|p| p.offset()).collect();
        let cumulative = table
            .iter()
            .map(|p| {
                let mut acc = 0u64;
                p.values()
                    .map(|k| {
                        acc += p.count(k).and_then(|c| c.to_u64()).expect("count fits u64");
                        acc
                    })
                    .collect()
            })
            .collect();
        SmallLaws { offsets, cumulative }
    })
}

/// One draw of `X_n`: `C(m) = m − 1 + C(I − 1) + C(m − I)` with `I` uniform
/// on `{1..m}`, unrolled until a subproblem has at most `DIRECT_MAX` keys;
/// such a subproblem is drawn exactly by inverting its permutation counts
/// with a single uniform integer below `m!`.
pub fn sample_comparisons<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    let laws = small_laws();
    let mut total = 0u64;
    let mut stack = Vec::with_capacity(64);
    let mut m = n;
    loop {
        while m > DIRECT_MAX {
            total += m - 1;
            let i = if m <= u64::from(u32::MAX) {
                u64::from(rng.gen_range(1..=m as u32))
            } else {
                rng.gen_range(1..=m)
            };
            stack.push(i - 1);
            m -= i;
        }
        if m >= 2 {
            let cum = &laws.cumulative[m as usize];
            let u = rng.gen_range(0..*cum.last().expect("non-empty law"));
            total += laws.offsets[m as usize] + cum.partition_point(|&c| c <= u) as u64;
        }
        match stack.pop() {
            Some(next) => m = next,
            None => break,
        }
    }
    total
}

/// The generator used for sample `index` of a batch.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Raw draws `X_n` for sample indices `0..count`.
pub fn sample_values(n: u64, count: usize, seed: u64) -> Vec<u64> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_comparisons(n, &mut sample_rng(seed, i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCount {
    pub x: f64,
    /// Samples with `Z_n > x`.
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: u64,
    pub seed: u64,
    pub count: u64,
    /// Statistics of `Z_n = (X_n − μ_n)/n`.
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
    pub min: f64,
    pub max: f64,
    #[serde(rename = "tailCounts")]
    pub tail_counts: Vec<TailCount>,
    pub generator: String,
}

impl SampleBatch {
    /// Unbiased sample variance of `Z_n`.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Empirical `P(Z_n > x)` for a threshold given to the batch.
    pub fn tail_fraction(&self, x: f64) -> Option<f64> {
        self.tail_counts
            .iter()
            .find(|t| t.x == x)
            .map(|t| t.count as f64 / self.count as f64)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,seed,count,mean,variance,min,max")?;
        writeln!(
            out,
            "{},{},{},{:?},{:?},{:?},{:?}",
            self.n,
            self.seed,
            self.count,
            self.mean,
            self.variance(),
            self.min,
            self.max
        )?;
        writeln!(out)?;
        writeln!(out, "x,exceedances,fraction")?;
        for t in &self.tail_counts {
            writeln!(out, "{:?},{},{:?}", t.x, t.count, t.count as f64 / self.count as f64)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    tails: Vec<u64>,
}

impl Moments {
    fn empty(k: usize) -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            tails: vec![0; k],
        }
    }

    fn push(&mut self, z: f64, thresholds: &[f64]) {
        self.count += 1;
        let d = z - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (z - self.mean);
        self.min = self.min.min(z);
        self.max = self.max.max(z);
        for (c, &x) in self.tails.iter_mut().zip(thresholds) {
            if z > x {
                *c += 1;
            }
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let d = b.mean - a.mean;
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        Self {
            count,
            mean: a.mean + d * nb / n,
            m2: a.m2 + b.m2 + d * d * na * nb / n,
            min: a.min.min(b.min),
            max: a.max.max(b.max),
            tails: a.tails.iter().zip(&b.tails).map(|(x, y)| x + y).collect(),
        }
    }
}

fn tree_reduce(mut parts: Vec<Moments>, k: usize) -> Moments {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => Moments::merge(a, b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().unwrap_or_else(|| Moments::empty(k))
}

/// `count` draws of `Z_n` with streaming statistics and tail counts at `thresholds`.
pub fn sample_batch(n: u64, count: usize, seed: u64, thresholds: &[f64]) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()));
    }
    let mu = specfun::mu(n);
    let scale = n.max(1) as f64;
    let k = thresholds.len();
    let chunks: Vec<Moments> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut m = Moments::empty(k);
            for i in lo..hi {
                let x = sample_comparisons(n, &mut sample_rng(seed, i as u64));
                m.push((x as f64 - mu) / scale, thresholds);
            }
            m
        })
        .collect();
    let m = tree_reduce(chunks, k);
    Ok(SampleBatch {
        n,
        seed,
        count: m.count,
        mean: m.mean,
        m2: m.m2,
        min: m.min,
        max: m.max,
        tail_counts: thresholds
            .iter()
            .zip(&m.tails)
            .map(|(&x, &c)| TailCount { x, count: c })
            .collect(),
        generator: GENERATOR.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sizes() {
        let mut rng = sample_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_comparisons(0, &mut rng), 0);
            assert_eq!(sample_comparisons(1, &mut rng), 0);
            assert_eq!(sample_comparisons(2, &mut rng), 1);
        }
    }

    #[test]
    fn n3_frequency() {
        let draws = sample_values(3, 100_000, 7);
        assert!(draws.iter().all(|&x| x == 2 || x == 3));
        let f = draws.iter().filter(|&&x| x == 2).count() as f64 / 1e5;
        let se = (1.0 / 3.0 * 2.0 / 3.0 / 1e5f64).sqrt();
        assert!((f - 1.0 / 3.0).abs() < 3.0 * se, "{f}");
    }

    #[test]
    fn matches_exact_law_across_cutoff() {
        use crate::exactdist::exact_pmf;
        for n in [DIRECT_MAX as usize, DIRECT_MAX as usize + 1, 26] {
            let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
            let draws = sample_values(n as u64, 40_000, 5);
            let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
            let se = (pmf.variance() / draws.len() as f64).sqrt();
            assert!((mean - pmf.mean()).abs() < 4.0 * se, "n={n}: {mean} vs {}", pmf.mean());
            // Kolmogorov distance of the empirical CDF
            let mut sorted = draws.clone();
            sorted.sort_unstable();
            let mut cdf = 0.0;
            let mut d: f64 = 0.0;
            for k in pmf.values() {
                cdf += pmf.prob(k);
                let emp = sorted.partition_point(|&x| x <= k) as f64 / sorted.len() as f64;
                d = d.max((emp - cdf).abs());
            }
            assert!(d < 1.63 / (draws.len() as f64).sqrt(), "n={n}: D = {d}");
        }
    }

    #[test]
    fn single_sample_n2() {
        let b = sample_batch(2, 1, 99, &[]).unwrap();
        assert_eq!(b.mean, 0.0);
        assert_eq!(b.variance(), 0.0);
        assert!(sample_batch(2, 0, 99, &[]).is_err());
    }

    #[test]
    fn mean_at_100() {
        let b = sample_batch(100, 100_000, 2024, &[]).unwrap();
        // Z_n has mean zero; three standard errors
        assert!(b.mean.abs() < 3.0 * b.std_err(), "{} vs {}", b.mean, b.std_err());
    }

    #[test]
    fn bounds_respected() {
        let n = 64u64;
        let b = sample_batch(n, 5000, 3, &[0.0, 1.0]).unwrap();
        let mu = specfun::mu(n);
        let top = ((n * (n - 1) / 2) as f64 - mu) / n as f64;
        assert!(b.max <= top);
        let pmf = crate::exactdist::exact_pmf(n as usize, crate::exactdist::ArithMode::Float).unwrap();
        let floor = (pmf.offset() as f64 - mu) / n as f64;
        assert!(b.min >= floor);
        assert!(b.tail_counts[0].count >= b.tail_counts[1].count);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_batch(200, 5000, 11, &[0.5]).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.m2.to_bits(), b.m2.to_bits());
        assert_eq!(a.tail_counts, b.tail_counts);
    }
}
