//! Tail and MGF exponents (natural log) for the limiting law `Z`.
//!
//! Every bound carries its unspecified constants as explicit slack
//! arguments; nothing here guesses them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::limitmgf::MgfTable;
use crate::specfun::{self, ALPHA, GAMMA_CAP};

const TWO_E: f64 = 2.0 * std::f64::consts::E;

fn ln_two_sqrt_pi() -> f64 {
    (2.0 * std::f64::consts::PI.sqrt()).ln()
}

fn check_two_e(x: f64) -> Result<()> {
    if !(x >= TWO_E) || !x.is_finite() {
        return Err(domain("x", x, "x >= 2e"));
    }
    Ok(())
}

/// `(w, J(w))` at `x`.
fn saddle(x: f64) -> Result<(f64, f64)> {
    check_two_e(x)?;
    let w = specfun::solve_w(x)?.w;
    Ok((w, specfun::j(w)))
}

/// `−x w + J(w) − w² + a ln x`.
pub fn new_upper_f(x: f64, a: f64) -> Result<f64> {
    let (w, jw) = saddle(x)?;
    Ok(-x * w + jw - w * w + a * x.ln())
}

/// The same exponent with the logarithmic slack replaced by `a·w`, i.e. the
/// Chernoff bound at `t = w` fed with `ln ψ(w) ≤ J(w) − w² + a w`.
pub fn sandwich_chernoff(x: f64, a: f64) -> Result<f64> {
    let (w, jw) = saddle(x)?;
    Ok(chernoff(x, w, jw - w * w + a * w))
}

/// `−x w + J(w) + c √(x ln x)`; the same form serves every `k ≥ 1`.
pub fn new_upper_fk(x: f64, k: u32, c: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let (w, jw) = saddle(x)?;
    Ok(-x * w + jw + c * (x * x.ln()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XaExponents {
    pub upper: f64,
    pub lower: f64,
}

/// `upper = −x ln x − x ln ln x + (1 + ln 2)x`, `lower = −x ln x − x ln ln x + C x`.
pub fn xa_exponents(x: f64, c: f64) -> Result<XaExponents> {
    if !(x > std::f64::consts::E) {
        return Err(domain("x", x, "x > e"));
    }
    let core = -x * x.ln() - x * x.ln().ln();
    Ok(XaExponents {
        upper: core + (1.0 + std::f64::consts::LN_2) * x,
        lower: core + c * x,
    })
}

/// `−x ln x`.
pub fn janson_exponent(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(domain("x", x, "x >= 1"));
    }
    Ok(-x * x.ln())
}

/// Where the Janson exponent meets the upper exponent: `ln ln x = 1 + ln 2`.
pub fn janson_xa_crossover() -> f64 {
    (1.0 + std::f64::consts::LN_2).exp().exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsConjecture {
    #[serde(rename = "lnFbar")]
    pub ln_fbar: f64,
    #[serde(rename = "lnDensity")]
    pub ln_density: f64,
}

/// Conjectured tail and density asymptotics with the unknown constant `C`.
pub fn ks_conjecture(x: f64, c: f64) -> Result<KsConjecture> {
    let (w, jw) = saddle(x)?;
    let base = -x * w + jw - w * w;
    Ok(KsConjecture {
        ln_fbar: base - (ALPHA + 0.5) * w - 1.5 * w.ln() + c - ln_two_sqrt_pi(),
        ln_density: -0.5 * (2.0 * std::f64::consts::PI * x).ln() + base - ALPHA * w - w.ln() + c,
    })
}

/// `J(t) − t² − αt − ln t + C`.
pub fn ks_conjecture_psi(t: f64, c: f64) -> Result<f64> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(domain("t", t, "t >= 1"));
    }
    Ok(specfun::j(t) - t * t - ALPHA * t - t.ln() + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    /// Mean of `ln ψ(t) − (J(t) − t² − αt − ln t)` over the window.
    pub c: f64,
    /// Max minus min of that difference over the window.
    pub spread: f64,
    pub points: usize,
}

/// Fits the constant of the conjectured `ln ψ` asymptotics on `[t_lo, t_hi]`.
pub fn fit_ks_constant(table: &MgfTable, t_lo: f64, t_hi: f64) -> Result<ConstantFit> {
    if !(t_lo >= 1.0 && t_hi >= t_lo) {
        return Err(Error::Invalid(format!("bad window [{t_lo}, {t_hi}]")));
    }
    let diffs: Vec<f64> = table
        .grid
        .iter()
        .zip(&table.ln_psi)
        .filter(|(t, _)| (t_lo..=t_hi).contains(*t))
        .map(|(&t, &l)| l - ks_conjecture_psi(t, 0.0).expect("t >= 1"))
        .collect();
    if diffs.is_empty() {
        return Err(Error::Invalid("no grid points in the window".into()));
    }
    let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConstantFit {
        c: diffs.iter().sum::<f64>() / diffs.len() as f64,
        spread: hi - lo,
        points: diffs.len(),
    })
}

/// `−t x + ln ψ(t)`.
pub fn chernoff(x: f64, t: f64, ln_psi_at: f64) -> f64 {
    -t * x + ln_psi_at
}

/// `Δ(x) = x(t̃ − w) − [J(t̃) − J(w)] + (t̃² − w²) − a(t̃ − w)`, the gain from
/// the optimal Chernoff abscissa `t̃` over `w`. With `δ = t̃ − w` and
/// `x = 2e^w/w` this equals `−x ∫_0^δ (e^v − 1 − v/w)/(1 + v/w) dv + δ(2w + δ − a)`,
/// which is what gets evaluated.
pub fn delta_gain(x: f64, a: f64) -> Result<f64> {
    check_two_e(x)?;
    let w = specfun::solve_w(x)?.w;
    let delta = specfun::solve_tw(x, a)?.offset;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let f = |v: f64| (v.exp_m1() - v / w) / (1.0 + v / w);
    let integral = if delta.abs() <= 1.0 {
        crate::quad::gl20().integrate(f, 0.0, delta)
    } else {
        let (lo, hi) = if delta > 0.0 { (0.0, delta) } else { (delta, 0.0) };
        let n = delta.abs().ceil() as usize;
        let breaks: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let v = crate::quad::adaptive(f, &breaks, 1e-14, 4096).value;
        if delta > 0.0 {
            v
        } else {
            -v
        }
    };
    Ok(-x * integral + delta * (2.0 * w + delta - a))
}

/// Direct evaluation of the defining difference (cancels badly for large `x`).
pub fn delta_gain_naive(x: f64, a: f64) -> Result<f64> {
    check_two_e(x)?;
    let w = specfun::solve_w(x)?.w;
    let t = specfun::solve_tw(x, a)?.t;
    Ok(x * (t - w) - (specfun::j(t) - specfun::j(w)) + (t * t - w * w) - a * (t - w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftTail {
    #[serde(rename = "lnUpper")]
    pub ln_upper: f64,
    #[serde(rename = "lnLower")]
    pub ln_lower: f64,
    /// `ln(−lnUpper)`, finite where `lnUpper` itself overflows.
    #[serde(rename = "lnNegLnUpper")]
    pub ln_neg_ln_upper: f64,
    #[serde(rename = "lnNegLnLower")]
    pub ln_neg_ln_lower: f64,
}

/// Left-tail exponents for `ln P(Z ≤ −x)`: `−e^{Γx + c_upper}` and `−e^{Γx + ln ln x + c_lower}`.
pub fn left_tail(x: f64, c_upper: f64, c_lower: f64) -> Result<LeftTail> {
    if !(x > std::f64::consts::E) {
        return Err(domain("x", x, "x > e"));
    }
    let up = GAMMA_CAP * x + c_upper;
    let lo = GAMMA_CAP * x + x.ln().ln() + c_lower;
    Ok(LeftTail { ln_upper: -up.exp(), ln_lower: -lo.exp(), ln_neg_ln_upper: up, ln_neg_ln_lower: lo })
}

/// Caller-supplied constants used in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Slacks {
    /// Logarithmic slack of `newUpperF`.
    pub a: f64,
    /// Constant in the conjectured asymptotics.
    #[serde(rename = "C")]
    pub c_conj: f64,
    /// `√(x ln x)` slack of `newUpperFk`.
    pub c: f64,
    pub k: u32,
    /// `O(x)` constant of the lower `xa` exponent.
    #[serde(rename = "cXa")]
    pub c_xa: f64,
    #[serde(rename = "cUpper")]
    pub c_upper: f64,
    #[serde(rename = "cLower")]
    pub c_lower: f64,
}

impl Default for Slacks {
    fn default() -> Self {
        Self { a: 0.0, c_conj: 0.0, c: 0.0, k: 1, c_xa: 0.0, c_upper: 0.0, c_lower: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub x: f64,
    pub exponents: BTreeMap<String, f64>,
    pub slacks: Slacks,
}

/// All exponents at one abscissa `x ≥ 2e`. The left-tail entries are given
/// as `ln(−ln P(Z ≤ −x))` so they stay finite.
pub fn bound_report(x: f64, s: &Slacks) -> Result<BoundReport> {
    check_two_e(x)?;
    let xa = xa_exponents(x, s.c_xa)?;
    let ks = ks_conjecture(x, s.c_conj)?;
    let left = left_tail(x, s.c_upper, s.c_lower)?;
    let exponents = [
        ("jansonUpper", janson_exponent(x)?),
        ("xaUpper", xa.upper),
        ("xaLower", xa.lower),
        ("newUpperF", new_upper_f(x, s.a)?),
        ("newUpperFk", new_upper_fk(x, s.k, s.c)?),
        ("ksConjF", ks.ln_fbar),
        ("ksConjDensity", ks.ln_density),
        ("leftUpper", left.ln_neg_ln_upper),
        ("leftLower", left.ln_neg_ln_lower),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(BoundReport { x, exponents, slacks: *s })
}

/// Smallest point of the ascending grid from which `newUpperF ≤ xaUpper`
/// holds at every later grid point (zero slacks).
pub fn new_upper_xa_crossover(grid: &[f64]) -> Result<Option<f64>> {
    let mut x0 = None;
    for &x in grid.iter().rev() {
        if new_upper_f(x, 0.0)? <= xa_exponents(x, 0.0)?.upper {
            x0 = Some(x);
        } else {
            break;
        }
    }
    Ok(x0)
}

/// Log-spaced grid with `per_decade` points per factor of ten.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let steps = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect()
}
