//! Scalar special functions and constants: harmonic numbers, the exact
//! mean `μ_n`, the splitting function `g`, the exponential-integral-type
//! function `J`, its saddle abscissa `w(x)`, the optimal Chernoff point
//! `t̃(x)`, and the perfect-tree series `s(ν)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;

/// Euler–Mascheroni constant (20 significant digits).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// `Var Z = 7 − 2π²/3`.
pub const VAR_Z: f64 = 7.0 - 2.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;

/// `α = 2 ln 2 + 2γ − 1`.
pub const ALPHA: f64 = 2.0 * std::f64::consts::LN_2 + 2.0 * EULER_GAMMA - 1.0;

/// `Γ = (2 − 1/ln 2)^{-1}`, the left-tail double-exponential rate.
pub const GAMMA_CAP: f64 = 1.0 / (2.0 - 1.0 / std::f64::consts::LN_2);

/// Largest `t` for which `J(t)` itself fits in an `f64`.
pub const J_DIRECT_MAX: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "varZ")]
    pub var_z: f64,
    pub alpha: f64,
    #[serde(rename = "gammaCap")]
    pub gamma_cap: f64,
    pub s1: f64,
}

pub fn constants() -> Constants {
    Constants {
        var_z: VAR_Z,
        alpha: ALPHA,
        gamma_cap: GAMMA_CAP,
        s1: s_series(1.0, 1e-17).expect("s(1) is in range"),
    }
}

// ---------------------------------------------------------------------------
// Harmonic numbers and the mean

pub fn harmonic_exact(n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    let mut h = BigRational::zero();
    for k in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(k));
    }
    Ok(h)
}

pub fn harmonic(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    Ok(harmonic_f64(n))
}

fn harmonic_f64(n: u64) -> f64 {
    if n <= 10_000 {
        // smallest terms first
        (1..=n).rev().map(|k| 1.0 / k as f64).sum()
    } else {
        let x = n as f64;
        let x2 = x * x;
        x.ln() + EULER_GAMMA + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
            - 1.0 / (252.0 * x2 * x2 * x2)
    }
}

/// `μ_n = 2(n+1)H_n − 4n`, exactly; `μ_0 = 0`.
pub fn mu_exact(n: u64) -> BigRational {
    if n == 0 {
        return BigRational::zero();
    }
    let h = harmonic_exact(n).expect("n >= 1");
    h * BigRational::from_integer(BigInt::from(2 * (n + 1)))
        - BigRational::from_integer(BigInt::from(4 * n))
}

pub fn mu(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    2.0 * (n as f64 + 1.0) * harmonic_f64(n) - 4.0 * n as f64
}

// ---------------------------------------------------------------------------
// g and φ

/// `φ(u) = u ln u + (1−u) ln(1−u)`, extended continuously to the endpoints.
pub fn phi(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("u", u, "0 <= u <= 1"));
    }
    Ok(phi_unchecked(u))
}

pub(crate) fn phi_unchecked(u: f64) -> f64 {
    let a = if u > 0.0 { u * u.ln() } else { 0.0 };
    let b = if u < 1.0 { (1.0 - u) * (-u).ln_1p() } else { 0.0 };
    a + b
}

/// `g(u) = 2u ln u + 2(1−u) ln(1−u) + 1 = 2φ(u) + 1`.
pub fn g(u: f64) -> Result<f64> {
    Ok(2.0 * phi(u)? + 1.0)
}

// ---------------------------------------------------------------------------
// J(t) = ∫_1^t 2e^s/s ds

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JQuad {
    pub value: f64,
    pub rel_err: f64,
}

fn j_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = lo + 2.0;
    while x < hi {
        b.push(x);
        x += 2.0;
    }
    b.push(hi);
    b
}

/// Adaptive Gauss–Legendre evaluation of `J(t)` with relative error `rel_tol`.
/// Above `t = 700` the value is not representable; use [`ln_j`].
pub fn j_quad(t: f64, rel_tol: f64) -> Result<JQuad> {
    if !(t >= 1.0) {
        return Err(domain("t", t, "t >= 1"));
    }
    if t > J_DIRECT_MAX {
        return Err(Error::Overflow(format!("J({t}) overflows f64; use ln_j")));
    }
    if t == 1.0 {
        return Ok(JQuad { value: 0.0, rel_err: 0.0 });
    }
    let q = quad::adaptive(|s| 2.0 * s.exp() / s, &j_breaks(1.0, t), rel_tol, 4096);
    if !q.converged {
        return Err(Error::Convergence(format!(
            "J({t}) reached relative error {:.3e} > {rel_tol:.1e}",
            q.rel_err()
        )));
    }
    Ok(JQuad { value: q.value, rel_err: q.rel_err() })
}

/// `J(t)` to near machine precision (`+inf` beyond `t = 700`).
pub fn j(t: f64) -> f64 {
    assert!(t >= 1.0, "J(t) requires t >= 1, got {t}");
    if t > J_DIRECT_MAX {
        return f64::INFINITY;
    }
    match j_quad(t, 1e-15) {
        Ok(q) => q.value,
        Err(_) => quad::adaptive(|s| 2.0 * s.exp() / s, &j_breaks(1.0, t), 1e-15, 1 << 14).value,
    }
}

/// `ln J(t)` for any `t > 1`, stable where `J(t)` itself overflows.
pub fn ln_j(t: f64, rel_tol: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(domain("t", t, "t >= 1"));
    }
    if t == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let q = quad::adaptive_ln(
        |s| std::f64::consts::LN_2 + s - s.ln(),
        &j_breaks(1.0, t),
        rel_tol,
        1 << 14,
    );
    if !q.converged {
        return Err(Error::Convergence(format!("ln J({t}) reached relative error {:.3e}", q.rel_err)));
    }
    Ok(q.ln_value)
}

/// `J(hi) − J(lo) = ∫_lo^hi 2e^s/s ds` without cancellation, for `1 <= lo <= hi`.
pub fn j_increment(lo: f64, hi: f64) -> f64 {
    assert!(lo >= 1.0 && hi >= lo, "j_increment needs 1 <= lo <= hi (got {lo}, {hi})");
    let d = hi - lo;
    if d == 0.0 {
        return 0.0;
    }
    if d <= 1.0 {
        // 2e^hi ∫_0^d e^{-v}/(hi - v) dv; analytic on a neighbourhood of [0, d]
        let inner = quad::gl20().integrate(|v| (-v).exp() / (hi - v), 0.0, d);
        return 2.0 * hi.exp() * inner;
    }
    quad::adaptive(|s| 2.0 * s.exp() / s, &j_breaks(lo, hi), 1e-15, 1 << 14).value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesTerms {
    /// Optimal truncation: stop before the first term that grows.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JSeries {
    pub value: f64,
    /// Number of terms summed (`j = 0 .. terms-1`).
    pub terms: usize,
    /// Magnitude of the last included term, on the scale of `J`.
    pub last_term: f64,
}

/// Divergent expansion `J(t) ~ 2t^{-1}e^t Σ_j j! t^{-j}`.
pub fn j_series(t: f64, terms: SeriesTerms) -> Result<JSeries> {
    if !(t >= 2.0) {
        return Err(domain("t", t, "t >= 2"));
    }
    if t > J_DIRECT_MAX {
        return Err(Error::Overflow(format!("J({t}) overflows f64")));
    }
    let lead = 2.0 * t.exp() / t;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut used = 0usize;
    loop {
        let j = used;
        let next = if j == 0 { 1.0 } else { term * j as f64 / t };
        let stop = match terms {
            SeriesTerms::Fixed(m) => used >= m,
            SeriesTerms::Auto => j as f64 > t,
        };
        if stop {
            break;
        }
        term = next;
        sum += term;
        used += 1;
    }
    Ok(JSeries { value: lead * sum, terms: used, last_term: lead * term })
}

// ---------------------------------------------------------------------------
// w(x): x = 2 w^{-1} e^w, w >= 1

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WSolve {
    pub x: f64,
    pub w: f64,
    /// `|2w^{-1}e^w − x|`
    pub residual: f64,
}

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX: usize = 100;

/// Solves `x = 2w^{-1}e^w` for the branch `w >= 1` (the `−1` branch of
/// Lambert W in `w e^{-w} = 2/x`).
pub fn solve_w(x: f64) -> Result<WSolve> {
    let two_e = 2.0 * std::f64::consts::E;
    if !(x >= two_e) || !x.is_finite() {
        return Err(domain("x", x, "x >= 2e"));
    }
    // Work with ln(x/2) = w − ln w, which is monotone on w >= 1.
    let target = (0.5 * x).ln();
    let f = |w: f64| w - w.ln() - target;
    let mut lo = 1.0;
    let mut hi = x.ln() + 2.0 * x.ln().ln().max(0.0) + 2.0;
    let mut w = if target > 1.0 { target + target.ln() } else { 1.0 };
    w = w.clamp(lo, hi);
    if x == two_e {
        w = 1.0;
    } else {
        for _ in 0..NEWTON_MAX {
            let fw = f(w);
            if fw > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            let d = 1.0 - 1.0 / w;
            let mut next = if d > 0.0 { w - fw / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - w).abs();
            w = next;
            if step <= NEWTON_TOL * w {
                break;
            }
        }
    }
    let residual = (2.0 * w.exp() / w - x).abs();
    Ok(WSolve { x, w, residual })
}

// ---------------------------------------------------------------------------
// t̃(x): larger root of x = 2(t^{-1}e^t − t) + a

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwSolve {
    pub t: f64,
    /// `t̃ − w(x)` computed without cancellation (NaN when `x < 2e`).
    pub offset: f64,
    pub residual: f64,
}

fn tw_rhs(t: f64, a: f64) -> f64 {
    2.0 * (t.exp() / t - t) + a
}

/// Minimiser of `t^{-1}e^t − t` on `t > 0` and the minimum value.
fn tw_valley() -> (f64, f64) {
    // derivative e^t (t-1)/t^2 - 1 changes sign on (1, 2)
    let dv = |t: f64| t.exp() * (t - 1.0) / (t * t) - 1.0;
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if dv(m) > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, t.exp() / t - t)
}

/// The larger positive root `t̃` of `x = 2(t^{-1}e^t − t) + a`.
pub fn solve_tw(x: f64, a: f64) -> Result<TwSolve> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain("a", a, "a >= 0"));
    }
    if !x.is_finite() {
        return Err(domain("x", x, "finite x"));
    }
    let (t_min, v_min) = tw_valley();
    if x - a <= 2.0 * v_min {
        return Err(Error::NoSolution(format!(
            "x - a = {} is not above the minimum {} of 2(e^t/t - t); no two positive roots",
            x - a,
            2.0 * v_min
        )));
    }
    // Bracket the larger root in t directly.
    let h = |t: f64| tw_rhs(t, a) - x;
    let lo0 = t_min;
    let mut hi0 = t_min + 1.0;
    while h(hi0) <= 0.0 {
        hi0 *= 2.0;
        if hi0 > 800.0 {
            return Err(Error::Overflow(format!("t̃({x}) beyond representable range")));
        }
    }
    let t_direct = newton_bisect(h, |t| 2.0 * (t.exp() * (t - 1.0) / (t * t) - 1.0), lo0, hi0)?;

    if x >= 2.0 * std::f64::consts::E {
        // Refine through the offset δ = t̃ − w, which keeps full relative
        // precision when δ ≪ w:  δ − ln(1 + δ/w) = ln(1 + (2(w+δ) − a)/x).
        let w = solve_w(x)?.w;
        let f = |d: f64| d - (d / w).ln_1p() - ((2.0 * (w + d) - a) / x).ln_1p();
        let df = |d: f64| 1.0 - 1.0 / (w + d) - 2.0 / (x + 2.0 * (w + d) - a);
        let guess = t_direct - w;
        let span = 4.0 * guess.abs().max(1e-300) + 1e-300;
        let (mut lo, hi) = (guess - span, guess + span);
        lo = lo.max(t_min - w);
        if f(lo) < 0.0 && f(hi) > 0.0 {
            let d = newton_bisect(f, df, lo, hi)?;
            let t = w + d;
            return Ok(TwSolve { t, offset: d, residual: (x - tw_rhs(t, a)).abs() });
        }
        let t = t_direct;
        return Ok(TwSolve { t, offset: t - w, residual: (x - tw_rhs(t, a)).abs() });
    }
    Ok(TwSolve { t: t_direct, offset: f64::NAN, residual: (x - tw_rhs(t_direct, a)).abs() })
}

/// Newton's method safeguarded by bisection on a sign-changing bracket
/// (`f(lo) < 0 < f(hi)` after orientation).
fn newton_bisect<F, D>(f: F, df: D, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSolution(format!("no sign change on [{lo}, {hi}]")));
    }
    let increasing = fhi > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..(NEWTON_MAX + 1100) {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= NEWTON_TOL * x.abs() || hi - lo <= f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!("root not isolated on [{lo}, {hi}]")))
}

// ---------------------------------------------------------------------------
// s(ν) = Σ_{j>=1} 2^{-j} ln(2^j ν − 1)

/// Perfect-tree series; terms are added until the next one drops below
/// `tol` times the partial sum.
pub fn s_series(nu: f64, tol: f64) -> Result<f64> {
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(domain("nu", nu, "nu >= 1"));
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "tol > 0"));
    }
    let ln_nu = nu.ln();
    let ln2 = std::f64::consts::LN_2;
    let term = |j: i32| -> f64 {
        let jf = j as f64;
        // ln(2^j ν − 1) = j ln 2 + ln ν + ln(1 − 2^{-j}/ν)
        0.5f64.powi(j) * (jf * ln2 + ln_nu + (-(0.5f64.powi(j)) / nu).ln_1p())
    };
    let mut sum = 0.0;
    let mut j = 1;
    loop {
        sum += term(j);
        let next = term(j + 1);
        if next.abs() < tol * sum.abs() || j > 1100 {
            break;
        }
        j += 1;
    }
    Ok(sum)
}
