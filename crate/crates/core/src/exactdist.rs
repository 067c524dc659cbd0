//! Exact law of the comparison count `X_n` by dynamic programming over the
//! pivot recurrence `X_n = X_{U-1} + X*_{n-U} + n - 1`, plus the scaled
//! views `Z_n = (X_n − μ_n)/n` and `Ẑ_n = (X_n − μ_n)/(n+1)`.

use std::fmt::Write as _;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::log_sum_exp;
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithMode {
    Rational,
    Float,
}

impl std::str::FromStr for ArithMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(ArithMode::Rational),
            "float" => Ok(ArithMode::Float),
            other => Err(Error::Invalid(format!("unknown arithmetic mode {other:?}"))),
        }
    }
}

/// Largest `n` built by default in each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmfCaps {
    pub rational: usize,
    pub float: usize,
}

impl Default for PmfCaps {
    fn default() -> Self {
        Self { rational: 30, float: 160 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    /// Permutation counts; the probability of `offset + i` is `counts[i] / n!`.
    Rational { counts: Vec<BigUint>, factorial: BigUint },
    Float(Vec<f64>),
}

/// Dense probability mass function of `X_n` on `offset ..= n(n−1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPmf {
    n: usize,
    offset: u64,
    weights: Weights,
}

impl ExactPmf {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Smallest comparison count in the support.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        match &self.weights {
            Weights::Rational { counts, .. } => counts.len(),
            Weights::Float(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> ArithMode {
        match self.weights {
            Weights::Rational { .. } => ArithMode::Rational,
            Weights::Float(_) => ArithMode::Float,
        }
    }

    /// Largest comparison count in the support, `n(n−1)/2`.
    pub fn max_value(&self) -> u64 {
        self.offset + self.len() as u64 - 1
    }

    /// Comparison counts `k` paired with their index in the dense array.
    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len() as u64).map(move |i| self.offset + i)
    }

    /// Exact `P(X_n = k)`; `None` in float mode.
    pub fn prob_exact(&self, k: u64) -> Option<BigRational> {
        match &self.weights {
            Weights::Rational { counts, factorial } => {
                let p = if k < self.offset || k > self.max_value() {
                    BigRational::zero()
                } else {
                    BigRational::new(
                        BigInt::from(counts[(k - self.offset) as usize].clone()),
                        BigInt::from(factorial.clone()),
                    )
                };
                Some(p)
            }
            Weights::Float(_) => None,
        }
    }

    /// Number of permutations of `n` keys costing exactly `k` comparisons
    /// (rational mode only).
    pub fn count(&self, k: u64) -> Option<BigUint> {
        match &self.weights {
            Weights::Rational { counts, .. } => Some(if k < self.offset || k > self.max_value() {
                BigUint::zero()
            } else {
                counts[(k - self.offset) as usize].clone()
            }),
            Weights::Float(_) => None,
        }
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k < self.offset || k > self.max_value() {
            return 0.0;
        }
        let i = (k - self.offset) as usize;
        match &self.weights {
            Weights::Rational { counts, factorial } => ratio_to_f64(&counts[i], factorial),
            Weights::Float(w) => w[i],
        }
    }

    /// Probabilities as `f64`, indexed like [`values`](Self::values).
    pub fn probs_f64(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Rational { counts, factorial } => {
                counts.iter().map(|c| ratio_to_f64(c, factorial)).collect()
            }
            Weights::Float(w) => w.clone(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        let mut p = self.probs_f64();
        p.sort_by(f64::total_cmp);
        p.iter().sum()
    }

    pub fn total_mass_exact(&self) -> Option<BigRational> {
        match &self.weights {
            Weights::Rational { counts, factorial } => {
                let s: BigUint = counts.iter().sum();
                Some(BigRational::new(s.into(), factorial.clone().into()))
            }
            Weights::Float(_) => None,
        }
    }

    pub fn mean_exact(&self) -> Option<BigRational> {
        match &self.weights {
            Weights::Rational { counts, factorial } => {
                let mut s = BigUint::zero();
                for (i, c) in counts.iter().enumerate() {
                    s += c * BigUint::from(self.offset + i as u64);
                }
                Some(BigRational::new(s.into(), factorial.clone().into()))
            }
            Weights::Float(_) => None,
        }
    }

    pub fn mean(&self) -> f64 {
        self.values().zip(self.probs_f64()).map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values()
            .zip(self.probs_f64())
            .map(|(k, p)| {
                let d = k as f64 - m;
                d * d * p
            })
            .sum()
    }

    pub fn variance_exact(&self) -> Option<BigRational> {
        let mean = self.mean_exact()?;
        let Weights::Rational { counts, factorial } = &self.weights else {
            return None;
        };
        let mut s = BigUint::zero();
        for (i, c) in counts.iter().enumerate() {
            let k = BigUint::from(self.offset + i as u64);
            s += c * &k * &k;
        }
        let second = BigRational::new(s.into(), factorial.clone().into());
        Some(second - &mean * &mean)
    }

    /// View of `(X_n − μ_n)/denominator`.
    pub fn scaled(&self, denom: Denom) -> ScaledLaw<'_> {
        ScaledLaw::new(self, denom)
    }

    /// CSV with header `k,probability`; rational weights print as reduced `num/den`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,probability")?;
        for k in self.values() {
            match &self.weights {
                Weights::Rational { .. } => {
                    let p = self.prob_exact(k).expect("rational mode");
                    writeln!(out, "{k},{}", format_rational(&p))?;
                }
                Weights::Float(_) => writeln!(out, "{k},{:?}", self.prob(k))?,
            }
        }
        Ok(())
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        let mut s = String::new();
        let _ = write!(s, "{}/{}", r.numer(), r.denom());
        s
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift so both fit comfortably in f64 before dividing.
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (num >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let d = (den >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

fn binomial_row(m: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 1..=m {
        let prev = row[k - 1].clone();
        row.push(prev * BigUint::from((m - k + 1) as u64) / BigUint::from(k as u64));
    }
    row
}

fn convolve_uint(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_f64(a: &[f64], b: &[f64], out: &mut [f64], scale: f64) {
    for (i, &x) in a.iter().enumerate() {
        let xs = x * scale;
        if xs == 0.0 {
            continue;
        }
        let dst = &mut out[i..i + b.len()];
        for (d, &y) in dst.iter_mut().zip(b) {
            *d += xs * y;
        }
    }
}

fn cap_error(n: usize, cap: usize, mode: ArithMode) -> Error {
    let support = n * n.saturating_sub(1) / 2 + 1;
    let work = (n as f64).powi(6) / 1440.0;
    let estimate = match mode {
        ArithMode::Rational => format!(
            "{support} big-integer weights of ~{} bits, ~{work:.1e} multiply-adds",
            factorial(n.min(400)).bits()
        ),
        ArithMode::Float => format!(
            "{:.1} MiB of tables, ~{work:.1e} multiply-adds",
            (n as f64).powi(3) / 6.0 * 8.0 / (1 << 20) as f64
        ),
    };
    Error::SizeCap {
        n,
        cap,
        mode: match mode {
            ArithMode::Rational => "rational",
            ArithMode::Float => "float",
        },
        estimate,
    }
}

/// `P(X_n = ·)` for the default caps.
pub fn exact_pmf(n: usize, mode: ArithMode) -> Result<ExactPmf> {
    exact_pmf_with_caps(n, mode, PmfCaps::default())
}

pub fn exact_pmf_with_caps(n: usize, mode: ArithMode, caps: PmfCaps) -> Result<ExactPmf> {
    Ok(exact_pmf_table(n, mode, caps)?.pop().expect("table has n + 1 entries"))
}

/// The laws of `X_0, …, X_n`, built bottom-up; each level reuses every lower one.
pub fn exact_pmf_table(n: usize, mode: ArithMode, caps: PmfCaps) -> Result<Vec<ExactPmf>> {
    let cap = match mode {
        ArithMode::Rational => caps.rational,
        ArithMode::Float => caps.float,
    };
    if n > cap {
        return Err(cap_error(n, cap, mode));
    }
    match mode {
        ArithMode::Rational => Ok(rational_table(n)),
        ArithMode::Float => Ok(float_table(n)),
    }
}

fn rational_table(n: usize) -> Vec<ExactPmf> {
    // counts[m][k - offset[m]] = #{permutations of m keys costing k comparisons}
    let mut counts: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    let mut offsets: Vec<u64> = vec![0];
    for m in 1..=n {
        let top = (m * (m - 1) / 2) as u64;
        let off = (1..=m)
            .map(|i| offsets[i - 1] + offsets[m - i])
            .min()
            .expect("m >= 1")
            + (m as u64 - 1);
        let len = (top - off + 1) as usize;
        let binom = binomial_row(m - 1);
        // Pivot ranks i and m+1-i give the same convolution; visit each pair once.
        let pairs: Vec<usize> = (1..=m.div_ceil(2)).collect();
        let parts: Vec<(u64, Vec<BigUint>)> = pairs
            .par_iter()
            .map(|&i| {
                let (l, r) = (i - 1, m - i);
                let mut c = convolve_uint(&counts[l], &counts[r]);
                let mult = if l == r { binom[i - 1].clone() } else { &binom[i - 1] << 1 };
                for v in c.iter_mut() {
                    *v *= &mult;
                }
                (offsets[l] + offsets[r] + m as u64 - 1, c)
            })
            .collect();
        let mut level = vec![BigUint::zero(); len];
        for (start, c) in parts {
            let base = (start - off) as usize;
            for (j, v) in c.into_iter().enumerate() {
                level[base + j] += v;
            }
        }
        counts.push(level);
        offsets.push(off);
    }
    counts
        .into_iter()
        .zip(offsets)
        .enumerate()
        .map(|(m, (c, off))| ExactPmf {
            n: m,
            offset: off,
            weights: Weights::Rational { counts: c, factorial: factorial(m) },
        })
        .collect()
}

fn float_table(n: usize) -> Vec<ExactPmf> {
    let mut probs: Vec<Vec<f64>> = vec![vec![1.0]];
    let mut offsets: Vec<u64> = vec![0];
    for m in 1..=n {
        let top = (m * (m - 1) / 2) as u64;
        let off = (1..=m)
            .map(|i| offsets[i - 1] + offsets[m - i])
            .min()
            .expect("m >= 1")
            + (m as u64 - 1);
        let len = (top - off + 1) as usize;
        let pairs: Vec<usize> = (1..=m.div_ceil(2)).collect();
        let parts: Vec<(usize, Vec<f64>)> = pairs
            .par_iter()
            .map(|&i| {
                let (l, r) = (i - 1, m - i);
                let start = offsets[l] + offsets[r] + m as u64 - 1;
                let mut c = vec![0.0; probs[l].len() + probs[r].len() - 1];
                let scale = if l == r { 1.0 } else { 2.0 } / m as f64;
                convolve_f64(&probs[l], &probs[r], &mut c, scale);
                ((start - off) as usize, c)
            })
            .collect();
        let mut level = vec![0.0; len];
        for (base, c) in parts {
            for (j, v) in c.into_iter().enumerate() {
                level[base + j] += v;
            }
        }
        probs.push(level);
        offsets.push(off);
    }
    probs
        .into_iter()
        .zip(offsets)
        .enumerate()
        .map(|(m, (p, off))| ExactPmf { n: m, offset: off, weights: Weights::Float(p) })
        .collect()
}

// ---------------------------------------------------------------------------
// Scaled laws

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Denom {
    /// `Z_n = (X_n − μ_n)/n`
    N,
    /// `Ẑ_n = (X_n − μ_n)/(n+1)`
    NPlusOne,
}

/// `(X_n − μ_n)/denom` with the weights of the underlying PMF.
#[derive(Debug, Clone)]
pub struct ScaledLaw<'a> {
    base: &'a ExactPmf,
    denom: Denom,
    center: f64,
    scale: f64,
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl<'a> ScaledLaw<'a> {
    pub fn new(base: &'a ExactPmf, denom: Denom) -> Self {
        let n = base.n() as u64;
        let center = specfun::mu(n);
        let scale = match denom {
            Denom::N => n.max(1) as f64,
            Denom::NPlusOne => (n + 1) as f64,
        };
        let atoms = base.values().map(|k| (k as f64 - center) / scale).collect();
        let probs = base.probs_f64();
        Self { base, denom, center, scale, atoms, probs }
    }

    pub fn base(&self) -> &ExactPmf {
        self.base
    }

    pub fn denom(&self) -> Denom {
        self.denom
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Atom positions, ascending.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn exact_scale(&self) -> BigRational {
        let n = self.base.n() as u64;
        let d = match self.denom {
            Denom::N => n.max(1),
            Denom::NPlusOne => n + 1,
        };
        BigRational::from_integer(BigInt::from(d))
    }

    /// Exact atom `(k − μ_n)/denom`.
    pub fn atom_exact(&self, k: u64) -> BigRational {
        (BigRational::from_integer(BigInt::from(k)) - specfun::mu_exact(self.base.n() as u64))
            / self.exact_scale()
    }

    /// `P(law > x)` (or `≥` when `strict` is false), summed smallest-first.
    pub fn tail_prob(&self, x: f64, strict: bool) -> f64 {
        let start = if strict {
            self.atoms.partition_point(|&a| a <= x)
        } else {
            self.atoms.partition_point(|&a| a < x)
        };
        self.probs[start..].iter().rev().sum()
    }

    /// Exact tail in rational mode; `None` for float-mode bases.
    pub fn tail_prob_exact(&self, x: &BigRational, strict: bool) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for k in self.base.values() {
            let a = self.atom_exact(k);
            let hit = if strict { &a > x } else { &a >= x };
            if hit {
                acc += self.base.prob_exact(k)?;
            }
        }
        Some(acc)
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }

    pub fn variance(&self) -> f64 {
        self.base.variance() / (self.scale * self.scale)
    }

    /// `ln E exp(t · law)` via log-sum-exp.
    pub fn ln_mgf(&self, t: f64) -> f64 {
        let terms: Vec<f64> = self
            .atoms
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, p)| p.ln() + t * a)
            .collect();
        log_sum_exp(&terms)
    }

    /// `E exp(t · law)`; errors when the value is not representable.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        let l = self.ln_mgf(t);
        if l > f64::MAX.ln() {
            return Err(Error::Overflow(format!("mgf at t = {t} has ln value {l}")));
        }
        Ok(l.exp())
    }

    /// `(P(law > y), P(law ≥ y))` at every atom `y`.
    fn survival_at_atoms(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.atoms.len());
        let mut above = 0.0;
        for (a, p) in self.atoms.iter().zip(&self.probs).rev() {
            let strict = above;
            above += p;
            out.push((*a, strict, above));
        }
        out.reverse();
        out
    }
}

/// `E exp(t Ẑ_n)`, the moment generating function of `(X_n − μ_n)/(n+1)`.
pub fn mgf_hat(pmf: &ExactPmf, t: f64) -> Result<f64> {
    pmf.scaled(Denom::NPlusOne).mgf(t)
}

/// `sup_x |P(a > x) − P(b > x)|`, evaluated with both one-sided limits at every atom.
pub fn ks_distance(a: &ScaledLaw<'_>, b: &ScaledLaw<'_>) -> f64 {
    let sa = a.survival_at_atoms();
    let sb = b.survival_at_atoms();
    // Survival of a law at an arbitrary point: strict (P(> y)) and weak (P(>= y)).
    fn eval(s: &[(f64, f64, f64)], y: f64) -> (f64, f64) {
        let i = s.partition_point(|e| e.0 < y);
        let weak = if i < s.len() { s[i].2 } else { 0.0 };
        let j = s.partition_point(|e| e.0 <= y);
        let strict = if j < s.len() { s[j].2 } else { 0.0 };
        (strict, weak)
    }
    let mut d: f64 = 0.0;
    for y in sa.iter().chain(sb.iter()).map(|e| e.0) {
        let (a_s, a_w) = eval(&sa, y);
        let (b_s, b_w) = eval(&sb, y);
        d = d.max((a_s - b_s).abs()).max((a_w - b_w).abs());
    }
    d
}

// ---------------------------------------------------------------------------
// Extremes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectTree {
    /// `k` with `n = 2^k − 1`.
    pub k: u32,
    /// `N (lg N − 2) + 2` with `N = n + 1`.
    pub min_value: u64,
    /// Exact probability `Π 1/(subtree size)` over the perfect tree, as `num/den`.
    pub min_prob: String,
    pub min_prob_f64: f64,
    /// `exp[−s(1)N + s(N)]`
    pub series_prob: f64,
    /// `exp[−s(1)N + s(N+1)]`, the variant printed with `N + 1`.
    pub series_prob_shifted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub n: usize,
    #[serde(rename = "maxVal")]
    pub max_val: u64,
    /// `2^{n−1}/n!` as `num/den`.
    #[serde(rename = "maxProb")]
    pub max_prob: String,
    #[serde(rename = "maxProbF64")]
    pub max_prob_f64: f64,
    #[serde(rename = "minVal", skip_serializing_if = "Option::is_none")]
    pub min_val: Option<u64>,
    #[serde(rename = "minProb", skip_serializing_if = "Option::is_none")]
    pub min_prob: Option<String>,
    /// Largest value of `Ẑ_n`: `n(n+7)/(2(n+1)) − 2H_n`.
    #[serde(rename = "lambdaN")]
    pub lambda_n: f64,
    /// `2H_N − lg N − 2`; equals `−min Ẑ_n` when `n = 2^k − 1`.
    #[serde(rename = "sigmaN")]
    pub sigma_n: f64,
}

pub fn path_probability(n: usize) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    BigRational::new(
        BigInt::from(BigUint::one() << (n - 1)),
        BigInt::from(factorial(n)),
    )
}

pub fn lambda_n(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    nf * (nf + 7.0) / (2.0 * (nf + 1.0)) - 2.0 * specfun::harmonic(n as u64).expect("n >= 1")
}

pub fn sigma_n(n: usize) -> f64 {
    let big_n = (n + 1) as f64;
    2.0 * specfun::harmonic(n as u64 + 1).expect("N >= 1") - big_n.log2() - 2.0
}

fn perfect_exponent(n: usize) -> Option<u32> {
    let big_n = n + 1;
    (n >= 1 && big_n.is_power_of_two()).then(|| big_n.trailing_zeros())
}

fn perfect_prob_exact(n: usize) -> BigRational {
    // A perfect tree on n = 2^k − 1 keys: root has subtree size n, two
    // perfect subtrees of size (n − 1)/2 each.
    if n <= 1 {
        return BigRational::one();
    }
    let child = perfect_prob_exact((n - 1) / 2);
    &child * &child / BigRational::from_integer(BigInt::from(n))
}

/// Minimum-count (perfect tree) data; rejects `n ≠ 2^k − 1`.
pub fn perfect_tree(n: usize) -> Result<PerfectTree> {
    let k = perfect_exponent(n).ok_or_else(|| {
        Error::Invalid(format!("perfect tree needs n = 2^k - 1, got n = {n}"))
    })?;
    let big_n = (n + 1) as u64;
    let min_value = (u64::from(k) * big_n + 2).saturating_sub(2 * big_n);
    let p = perfect_prob_exact(n);
    let s1 = specfun::s_series(1.0, 1e-17)?;
    let nf = big_n as f64;
    Ok(PerfectTree {
        k,
        min_value,
        min_prob: format_rational(&p),
        min_prob_f64: p.to_f64().unwrap_or(0.0),
        series_prob: (-s1 * nf + specfun::s_series(nf, 1e-17)?).exp(),
        series_prob_shifted: (-s1 * nf + specfun::s_series(nf + 1.0, 1e-17)?).exp(),
    })
}

pub fn extremes(n: usize) -> Extremes {
    let max_prob = path_probability(n);
    let perfect = perfect_tree(n).ok();
    Extremes {
        n,
        max_val: (n * n.saturating_sub(1) / 2) as u64,
        max_prob_f64: max_prob.to_f64().unwrap_or(0.0),
        max_prob: format_rational(&max_prob),
        min_val: perfect.as_ref().map(|p| p.min_value),
        min_prob: perfect.map(|p| p.min_prob),
        lambda_n: lambda_n(n),
        sigma_n: sigma_n(n),
    }
}

/// Exact rational tail reduced to lowest terms (helper for reports).
pub fn reduce(r: &BigRational) -> (BigInt, BigInt) {
    let g = r.numer().gcd(r.denom());
    (r.numer() / &g, r.denom() / &g)
}
