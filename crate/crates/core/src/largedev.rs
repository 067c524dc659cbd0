//! Finite-`n` large deviations: the window `I_n`, the McDiarmid–Hayward
//! range, right and left tail exponents, and empirical verification against
//! exact or simulated tails of `Z_n = (X_n − μ_n)/n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{domain, Error, Result};
use crate::exactdist::{Denom, ExactPmf};
use crate::sampler::SampleBatch;
use crate::specfun::{self, GAMMA_CAP};

pub const DEFAULT_C: f64 = 1.5;
pub const DEFAULT_OMEGA: f64 = 1.0;

/// `I_n = [c, ½(ln n/ln ln n)(1 − ω_n/ln ln n)]`; may be empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdWindow {
    pub n: u64,
    pub c: f64,
    #[serde(rename = "omegaN")]
    pub omega_n: f64,
    pub lo: f64,
    pub hi: f64,
}

impl LdWindow {
    pub fn new(n: u64, c: f64, omega_n: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(domain("c", c, "c > 1"));
        }
        if !(omega_n > 0.0) {
            return Err(domain("omega_n", omega_n, "omega_n > 0"));
        }
        if n < 3 {
            return Err(domain("n", n as f64, "n >= 3 (ln ln n > 0)"));
        }
        let l1 = (n as f64).ln();
        let l2 = l1.ln();
        let hi = 0.5 * (l1 / l2) * (1.0 - omega_n / l2);
        Ok(Self { n, c, omega_n, lo: c, hi })
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        !self.is_empty() && x >= self.lo && x <= self.hi
    }
}

/// `(μ_n/(n ln n), μ_n/n]`.
pub fn mcd_range(n: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(domain("n", n as f64, "n >= 2"));
    }
    let m = specfun::mu(n) / n as f64;
    Ok((m / (n as f64).ln(), m))
}

/// Constants for the finite-`n` exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdSlacks {
    /// `O(x)` constant of the lower exponent.
    #[serde(rename = "cLower")]
    pub c_lower: f64,
    /// Coefficient of `ln x` in the sharp upper exponent.
    #[serde(rename = "aUpper")]
    pub a_upper: f64,
    /// Coefficient of `x` added to the simple upper exponent.
    #[serde(rename = "cSimple")]
    pub c_simple: f64,
    /// Coefficient of `ln ln ln n` in the McDiarmid–Hayward exponent.
    #[serde(rename = "cMcd")]
    pub c_mcd: f64,
}

impl Default for LdSlacks {
    fn default() -> Self {
        Self { c_lower: 0.0, a_upper: 0.0, c_simple: 0.0, c_mcd: 0.0 }
    }
}

/// Exponents at `x`; `None` where `x` is outside a form's domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdExponents {
    pub lower: Option<f64>,
    #[serde(rename = "upperSharp")]
    pub upper_sharp: Option<f64>,
    #[serde(rename = "upperSimple")]
    pub upper_simple: Option<f64>,
    pub mcd: Option<f64>,
}

impl LdExponents {
    /// The envelope used for pass/fail: the sharp form where defined, else the simple one.
    pub fn upper(&self) -> Option<f64> {
        self.upper_sharp.or(self.upper_simple)
    }
}

fn lll(n: u64) -> Option<f64> {
    let l2 = (n as f64).ln().ln();
    (l2 > 0.0).then(|| l2.ln())
}

pub fn ld_exponents(n: u64, x: f64, s: &LdSlacks) -> Result<LdExponents> {
    if !x.is_finite() {
        return Err(domain("x", x, "finite"));
    }
    let pure = |x: f64| -x * x.ln() - x * x.ln().ln();
    let lower = (x > 1.0).then(|| pure(x) + s.c_lower * x);
    let upper_simple =
        (x > 1.0).then(|| pure(x) + (1.0 + std::f64::consts::LN_2) * x + s.c_simple * x);
    let upper_sharp = if x >= 2.0 * std::f64::consts::E {
        Some(bounds::new_upper_f(x, s.a_upper)?)
    } else {
        None
    };
    let mcd = match (n >= 2).then(|| mcd_range(n)).transpose()? {
        Some((lo, hi)) if x > lo && x <= hi && x > 0.0 => {
            lll(n).map(|l3| -x * (x.ln() + s.c_mcd * l3))
        }
        _ => None,
    };
    Ok(LdExponents { lower, upper_sharp, upper_simple, mcd })
}

/// `n^{−1/2} e^{C √(ln n)}`.
pub fn ks_bound(n: u64, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain("n", n as f64, "n >= 2"));
    }
    let l = (n as f64).ln();
    Ok((-0.5 * l + c * l.sqrt()).exp())
}

/// Smallest `C` with `d_n ≤ ks_bound(n, C)` for every pair.
pub fn fit_ks_constant(pairs: &[(u64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Invalid("no KS distances to fit".into()));
    }
    let mut c = f64::NEG_INFINITY;
    for &(n, d) in pairs {
        if n < 2 || !(d > 0.0) {
            return Err(Error::Invalid(format!("unusable KS pair ({n}, {d})")));
        }
        let l = (n as f64).ln();
        c = c.max((d.ln() + 0.5 * l) / l.sqrt());
    }
    Ok(c)
}

/// Where empirical tails come from.
#[derive(Debug, Clone, Copy)]
pub enum TailSource<'a> {
    Exact(&'a ExactPmf),
    MonteCarlo(&'a SampleBatch),
}

impl TailSource<'_> {
    fn n(&self) -> u64 {
        match self {
            TailSource::Exact(p) => p.n() as u64,
            TailSource::MonteCarlo(b) => b.n,
        }
    }

    /// `(P(Z_n > x), exceedance count when simulated)`.
    fn tail(&self, x: f64) -> Result<(f64, Option<u64>)> {
        match self {
            TailSource::Exact(p) => Ok((p.scaled(Denom::N).tail_prob(x, true), None)),
            TailSource::MonteCarlo(b) => {
                let t = b.tail_counts.iter().find(|t| t.x == x).ok_or_else(|| {
                    Error::Invalid(format!("batch has no tail count at x = {x}"))
                })?;
                Ok((t.count as f64 / b.count as f64, Some(t.count)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdRow {
    pub n: u64,
    pub x: f64,
    /// `ln P(Z_n > x)`; `None` when no tail mass was observed.
    pub empirical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceedances: Option<u64>,
    pub exponents: LdExponents,
    /// Whether `x` lies in `I_n`.
    pub window: bool,
    #[serde(rename = "mcdApplicable")]
    pub mcd_applicable: bool,
    pub slacks: LdSlacks,
    /// `lower ≤ empirical ≤ upper`; `None` when the tail is empty.
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdReport {
    pub n: u64,
    pub source: String,
    pub window: LdWindow,
    pub slacks: LdSlacks,
    pub rows: Vec<LdRow>,
}

impl LdReport {
    /// Every row with tail mass passes.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }
}

/// Checks the envelopes at every `x` in `grid` against the given source.
pub fn verify_ld(
    grid: &[f64],
    source: TailSource<'_>,
    slacks: &LdSlacks,
    window: &LdWindow,
) -> Result<LdReport> {
    let n = source.n();
    let rows = grid
        .par_iter()
        .map(|&x| {
            let (p, count) = source.tail(x)?;
            let exponents = ld_exponents(n, x, slacks)?;
            let empirical = (p > 0.0).then(|| p.ln());
            let pass = empirical.map(|e| {
                let lo_ok = exponents.lower.is_none_or(|l| l <= e);
                let hi_ok = exponents.upper().is_none_or(|u| e <= u);
                lo_ok && hi_ok
            });
            Ok(LdRow {
                n,
                x,
                empirical,
                exceedances: count,
                exponents,
                window: window.contains(x),
                mcd_applicable: exponents.mcd.is_some(),
                slacks: *slacks,
                pass,
                note: empirical.is_none().then(|| "no tail mass observed".to_string()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LdReport {
        n,
        source: match source {
            TailSource::Exact(_) => "exact".into(),
            TailSource::MonteCarlo(_) => "montecarlo".into(),
        },
        window: *window,
        slacks: *slacks,
        rows,
    })
}

/// Tightest single constants that make every observed tail in `grid` sit
/// inside the envelopes: the largest `c_lower`, and the smallest nonnegative
/// `a_upper` and `c_simple`.
pub fn fit_ld_slacks(grid: &[f64], source: TailSource<'_>) -> Result<LdSlacks> {
    let mut c_lower = f64::INFINITY;
    let mut a_upper: f64 = 0.0;
    let mut c_simple: f64 = 0.0;
    let zero = LdSlacks::default();
    let n = source.n();
    for &x in grid {
        let (p, _) = source.tail(x)?;
        if !(p > 0.0) {
            continue;
        }
        let e = p.ln();
        let ex = ld_exponents(n, x, &zero)?;
        if let Some(l) = ex.lower {
            c_lower = c_lower.min((e - l) / x);
        }
        match ex.upper_sharp {
            Some(u) if x.ln() > 0.0 => a_upper = a_upper.max((e - u) / x.ln()),
            _ => {
                if let Some(u) = ex.upper_simple {
                    c_simple = c_simple.max((e - u) / x);
                }
            }
        }
    }
    if !c_lower.is_finite() {
        c_lower = 0.0;
    }
    Ok(LdSlacks { c_lower, a_upper, c_simple, c_mcd: 0.0 })
}

/// Iterated natural logarithm `L_k n`, `None` once an argument is not positive.
pub fn iterated_log(n: f64, k: u32) -> Option<f64> {
    let mut v = n;
    for _ in 0..k {
        if !(v > 0.0) {
            return None;
        }
        v = v.ln();
    }
    Some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftLd {
    #[serde(rename = "lnUpper")]
    pub ln_upper: f64,
    #[serde(rename = "lnLower")]
    pub ln_lower: f64,
    #[serde(rename = "domainOk")]
    pub domain_ok: bool,
    /// Upper end `Γ^{−1}(L₂n − L₄n − ω_n)` of the admissible range, when defined.
    #[serde(rename = "xMax", skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Left-tail exponents for `ln P(Z_n < −x)` and the admissible range check.
pub fn left_ld(n: u64, x: f64, c_upper: f64, c_lower: f64, omega_n: f64) -> Result<LeftLd> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(domain("x", x, "x > 1"));
    }
    let ln_upper = -(GAMMA_CAP * x + c_upper).exp();
    let ln_lower = -(GAMMA_CAP * x + x.ln().ln() + c_lower).exp();
    let nf = n as f64;
    let l2 = iterated_log(nf, 2);
    let l4 = iterated_log(nf, 4);
    let (domain_ok, x_max, reason) = match (l2, l4) {
        (Some(l2), Some(l4)) if l4 > 0.0 => {
            let x_max = (l2 - l4 - omega_n) / GAMMA_CAP;
            let ok = x <= x_max;
            (ok, Some(x_max), (!ok).then(|| format!("x = {x} exceeds {x_max}")))
        }
        _ => (false, None, Some(format!("L4 n is not positive for n = {n} (needs n > e^(e^e))"))),
    };
    Ok(LeftLd { ln_upper, ln_lower, domain_ok, x_max, reason })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRow {
    pub n: u64,
    #[serde(rename = "lnTail")]
    pub ln_tail: Option<f64>,
    #[serde(rename = "lnTailTenfold")]
    pub ln_tail_tenfold: Option<f64>,
    pub gap: Option<f64>,
}

/// `|ln P(Z_n > x) − ln P(Z_{10n} > x)|` from simulation, one row per `n`.
pub fn stabilization(ns: &[u64], x: f64, reps: usize, seed: u64) -> Result<Vec<StabilizationRow>> {
    let tail = |n: u64| -> Result<Option<f64>> {
        let b = crate::sampler::sample_batch(n, reps, seed, &[x])?;
        let c = b.tail_counts[0].count;
        Ok((c > 0).then(|| (c as f64 / reps as f64).ln()))
    };
    ns.iter()
        .map(|&n| {
            let a = tail(n)?;
            let b = tail(10 * n)?;
            Ok(StabilizationRow {
                n,
                ln_tail: a,
                ln_tail_tenfold: b,
                gap: a.zip(b).map(|(a, b)| (a - b).abs()),
            })
        })
        .collect()
}
