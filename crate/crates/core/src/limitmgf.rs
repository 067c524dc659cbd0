//! Moment generating function `ψ(t) = E e^{tZ}` of the limiting law.
//!
//! `ψ` solves `ψ(t) = 2∫_0^{1/2} ψ(ut) ψ((1−u)t) e^{t g(u)} du`. After the
//! substitution `u = ½e^{−t}η` this reads
//! `ψ(t) = ∫_0^{e^t} ψ(a) ψ(t−a) exp(2tφ(u)) dη` with `a = tu`, whose
//! integrand has unit-scale support near `η = 0`. Everything here works with
//! `ln ψ`, which grows like `J(t) − t²`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{self, log_sum_exp};
use crate::specfun::{self, ALPHA, VAR_Z};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HpsiVariant {
    /// Factor `1 − e^{−t/2}`: a strict supersolution for large `t`.
    Minus,
    /// Factor `1 + e^{−t/2}`: a strict subsolution for large `t`.
    Plus,
}

impl HpsiVariant {
    fn sign(self) -> f64 {
        match self {
            HpsiVariant::Minus => -1.0,
            HpsiVariant::Plus => 1.0,
        }
    }
}

impl std::str::FromStr for HpsiVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(HpsiVariant::Minus),
            "plus" => Ok(HpsiVariant::Plus),
            other => Err(Error::Invalid(format!("unknown variant {other:?}"))),
        }
    }
}

fn ln_factor(t: f64, v: HpsiVariant) -> f64 {
    (v.sign() * (-0.5 * t).exp()).ln_1p()
}

/// `ln ĥψ(t) = ln(1 ∓ e^{−t/2}) + J(t) − t² − αt − ln t` for `t > 1`, else `0`.
pub fn lnhpsi(t: f64, variant: HpsiVariant) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    let jt = if t <= specfun::J_DIRECT_MAX {
        specfun::j(t)
    } else {
        specfun::ln_j(t, 1e-15).map(f64::exp).unwrap_or(f64::INFINITY)
    };
    ln_factor(t, variant) + jt - t * t - ALPHA * t - t.ln()
}

/// `ln ĥψ(t − a) − ln ĥψ(t)` for `0 ≤ a < t − 1`, formed from increments so
/// nothing of size `J(t)` is subtracted.
fn lnhpsi_drop(t: f64, a: f64, variant: HpsiVariant) -> f64 {
    let s = t - a;
    ln_factor(s, variant) - ln_factor(t, variant) - specfun::j_increment(s, t)
        + a * (2.0 * t - a)
        + ALPHA * a
        - (-a / t).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRatio {
    pub t: f64,
    pub variant: HpsiVariant,
    /// `λ(t)/ĥψ(t)`.
    pub ratio: f64,
    /// `ratio − 1`, accurate even when the ratio is within rounding of one.
    #[serde(rename = "ratioMinusOne")]
    pub ratio_minus_one: f64,
    /// Achieved relative error of the quadrature.
    #[serde(rename = "relErr")]
    pub rel_err: f64,
    pub converged: bool,
    pub panels: usize,
}

/// `λ(t)/ĥψ(t)` with `λ(t) = 2∫_0^{1/2} ĥψ(ut)ĥψ((1−u)t)e^{tg(u)}du`, in log
/// space and in the `η` variable. A tolerance below what doubles can deliver
/// is not an error: the result carries `converged = false` and the error
/// actually reached.
pub fn lambda_ratio(t: f64, variant: HpsiVariant, rel_tol: f64) -> Result<LambdaRatio> {
    if !(t >= 3.0) || !t.is_finite() {
        return Err(domain("t", t, "t >= 3"));
    }
    if !(rel_tol > 0.0) {
        return Err(domain("relTol", rel_tol, "relTol > 0"));
    }
    let scale = 0.5 * (-t).exp();
    let ln_integrand = |eta: f64| {
        let u = scale * eta;
        let a = t * u;
        lnhpsi(a, variant) + lnhpsi_drop(t, a, variant) + 2.0 * t * specfun::phi_unchecked(u)
    };
    let top = t.exp();
    let mut breaks = vec![0.0, 1.0, 5.0, 20.0, 60.0, (0.1 * t).exp(), 2.0 * top / t, top];
    breaks.retain(|&b| b <= top);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = quad::adaptive_ln(ln_integrand, &breaks, rel_tol, 1 << 13);
    Ok(LambdaRatio {
        t,
        variant,
        ratio: q.ln_value.exp(),
        ratio_minus_one: q.ln_value.exp_m1(),
        rel_err: q.rel_err,
        converged: q.converged,
        panels: q.panels,
    })
}

/// Smallest grid point from which the minus variant stays below one through
/// the end of `ts`, if any.
pub fn empirical_threshold(ratios: &[LambdaRatio]) -> Option<f64> {
    let mut t2 = None;
    for r in ratios.iter().rev() {
        if r.ratio_minus_one < 0.0 {
            t2 = Some(r.t);
        } else {
            break;
        }
    }
    t2
}

// ---------------------------------------------------------------------------
// Fixed point

/// Tabulated `ln ψ` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfTable {
    pub grid: Vec<f64>,
    #[serde(rename = "lnPsi")]
    pub ln_psi: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change produced by one more application of the map.
    pub residual: f64,
    pub converged: bool,
}

impl MgfTable {
    /// Table from given values (ascending grid); `iterations = 0`.
    pub fn from_values(grid: Vec<f64>, ln_psi: Vec<f64>) -> Result<Self> {
        if grid.len() != ln_psi.len() || grid.len() < 2 {
            return Err(Error::Invalid("grid and values must match, at least two points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("grid must be strictly ascending".into()));
        }
        Ok(Self { grid, ln_psi, iterations: 0, residual: 0.0, converged: true })
    }

    pub fn t_max(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    /// Minimum second difference of `ln ψ` (discrete convexity check).
    pub fn min_second_difference(&self) -> f64 {
        self.ln_psi
            .windows(3)
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.ln_psi.windows(2).all(|w| w[1] >= w[0])
    }

    /// `ln ψ(t)` by interpolation of the table against the series baseline.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.grid[0] && t <= self.t_max()) {
            return Err(domain("t", t, "inside the table grid"));
        }
        let base: Vec<f64> = self.grid.iter().map(|&x| baseline(x)).collect();
        let resid: Vec<f64> = self.ln_psi.iter().zip(&base).map(|(l, b)| l - b).collect();
        let mut p = MonotoneCubic::new(&self.grid, &resid);
        if self.grid[0] == 0.0 {
            p = p.with_start_slope(0.0);
        }
        Ok(p.eval(t) + baseline(t))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,lnPsi")?;
        for (t, l) in self.grid.iter().zip(&self.ln_psi) {
            writeln!(out, "{t:?},{l:?}")?;
        }
        Ok(())
    }
}

/// `2 Σ_{k≥2} t^k/(k·k!) = 2(Ei(t) − γ − ln t − t)`: the smooth convex part
/// of `ln ψ` at large `t`, removed before interpolation.
pub fn baseline(t: f64) -> f64 {
    let mut term = 0.5 * t * t;
    let mut sum = 0.0;
    let mut k = 2.0;
    loop {
        let add = term / k;
        sum += add;
        if add <= 1e-17 * sum || add == 0.0 {
            break;
        }
        k += 1.0;
        term *= t / k;
    }
    2.0 * sum
}

/// Monotonicity-preserving cubic Hermite interpolant: node slopes are
/// derivatives of the five-point Lagrange polynomial, then passed through
/// the Hyman filter so that monotone data give a monotone curve.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Needs at least five strictly ascending nodes.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert!(x.len() == y.len() && x.len() >= 5);
        let st = stencils(x);
        let mut d = vec![0.0; x.len()];
        slopes(x, y, &st, &mut d);
        Self { x: x.to_vec(), y: y.to_vec(), d }
    }

    /// Overrides the slope at the first node.
    pub fn with_start_slope(mut self, d0: f64) -> Self {
        self.d[0] = d0;
        hyman(&self.x, &self.y, &mut self.d[..2], 0);
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let [h00, h10, h01, h11] = hermite_basis(s);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn hermite_basis(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2]
}

/// Derivative weights of the five-point Lagrange polynomial at each node.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    start: usize,
    w: [f64; 5],
}

fn stencils(x: &[f64]) -> Vec<Stencil> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(2).min(n - 5);
            let xs = &x[start..start + 5];
            let c = k - start;
            let mut w = [0.0; 5];
            for j in 0..5 {
                w[j] = if j == c {
                    (0..5).filter(|&m| m != c).map(|m| 1.0 / (xs[c] - xs[m])).sum()
                } else {
                    let num: f64 =
                        (0..5).filter(|&m| m != j && m != c).map(|m| xs[c] - xs[m]).product();
                    let den: f64 = (0..5).filter(|&m| m != j).map(|m| xs[j] - xs[m]).product();
                    num / den
                };
            }
            Stencil { start, w }
        })
        .collect()
}

fn slopes(x: &[f64], y: &[f64], st: &[Stencil], d: &mut [f64]) {
    for (dk, s) in d.iter_mut().zip(st) {
        *dk = s.w.iter().zip(&y[s.start..s.start + 5]).map(|(w, v)| w * v).sum();
    }
    hyman(x, y, d, 0);
}

/// Limits slopes `d[i]` (node `offset + i`) to the monotone region of the
/// neighbouring secants.
fn hyman(x: &[f64], y: &[f64], d: &mut [f64], offset: usize) {
    let n = x.len();
    let secant = |k: usize| (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    for (i, dk) in d.iter_mut().enumerate() {
        let k = offset + i;
        let (lo, hi) = match k {
            0 => (secant(0), secant(0)),
            _ if k == n - 1 => (secant(n - 2), secant(n - 2)),
            _ => (secant(k - 1), secant(k)),
        };
        if lo == 0.0 || hi == 0.0 {
            *dk = 0.0;
            continue;
        }
        if lo * hi < 0.0 {
            continue;
        }
        if *dk * lo <= 0.0 {
            *dk = 0.0;
        } else {
            let cap = 3.0 * lo.abs().min(hi.abs());
            if dk.abs() > cap {
                *dk = cap.copysign(lo);
            }
        }
    }
}

/// Where an off-grid argument lands: interval index and Hermite weights.
#[derive(Debug, Clone, Copy)]
struct Probe {
    k: u32,
    basis: [f64; 4],
}

/// Precomputed quadrature for one grid row: the map at that row is
/// `log Σ_q exp(c_q + R(a_q) + R(t − a_q))`.
#[derive(Debug, Clone)]
struct Row {
    c: Vec<f64>,
    left: Vec<Probe>,
    right: Vec<Probe>,
}

struct FixpointMap {
    grid: Vec<f64>,
    h: f64,
    base: Vec<f64>,
    stencils: Vec<Stencil>,
    rows: Vec<Row>,
}

impl FixpointMap {
    fn new(grid: Vec<f64>) -> Self {
        let h = grid[1] - grid[0];
        let base: Vec<f64> = grid.iter().map(|&t| baseline(t)).collect();
        let gl = quad::gl20();
        let probe = |x: f64| -> Probe {
            let n = grid.len();
            let k = ((x / h).floor() as usize).min(n - 2);
            let s = ((x - grid[k]) / h).clamp(0.0, 1.0);
            Probe { k: k as u32, basis: hermite_basis(s) }
        };
        let rows = grid[1..]
            .par_iter()
            .map(|&t| {
                let top = t.exp();
                let mut br = vec![0.0];
                let mut b = 0.25;
                while b < top {
                    br.push(b);
                    b *= 2.0;
                }
                br.push(top);
                let mut row = Row { c: Vec::new(), left: Vec::new(), right: Vec::new() };
                for w in br.windows(2) {
                    let half = 0.5 * (w[1] - w[0]);
                    let mid = 0.5 * (w[1] + w[0]);
                    for (x, wt) in gl.nodes().iter().zip(gl.weights()) {
                        let eta = mid + half * x;
                        let u = 0.5 * (-t).exp() * eta;
                        let a = t * u;
                        let b = t - a;
                        row.c.push(
                            (wt * half).ln()
                                + 2.0 * t * specfun::phi_unchecked(u)
                                + baseline(a)
                                + baseline(b),
                        );
                        row.left.push(probe(a));
                        row.right.push(probe(b));
                    }
                }
                row
            })
            .collect();
        let stencils = stencils(&grid);
        Self { grid, h, base, stencils, rows }
    }

    fn len(&self) -> usize {
        self.grid.len()
    }

    /// Applies the map to a table of `ln ψ` values.
    fn apply(&self, l: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = l.iter().zip(&self.base).map(|(l, b)| l - b).collect();
        let mut d = vec![0.0; r.len()];
        slopes(&self.grid, &r, &self.stencils, &mut d);
        // Mean zero: ln ψ and the baseline both have zero slope at the origin.
        d[0] = 0.0;
        hyman(&self.grid, &r, &mut d[1..2], 1);
        let h = self.h;
        let interp = |p: &Probe| {
            let k = p.k as usize;
            let [h00, h10, h01, h11] = p.basis;
            h00 * r[k] + h10 * h * d[k] + h01 * r[k + 1] + h11 * h * d[k + 1]
        };
        let mut out = Vec::with_capacity(l.len());
        out.push(0.0);
        out.extend(self.rows.iter().map(|row| {
            let mut terms = Vec::with_capacity(row.c.len());
            for ((c, pl), pr) in row.c.iter().zip(&row.left).zip(&row.right) {
                terms.push(c + interp(pl) + interp(pr));
            }
            log_sum_exp(&terms)
        }));
        out
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
fn lu_solve(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        if a[piv * n + col] == 0.0 {
            return Err(Error::Convergence("singular Newton system".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
            b[i] -= f * b[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}

/// One damped Newton step on `F(L) = T(L) − L`, with a finite-difference
/// Jacobian. Returns the new table and its residual.
fn newton_step(map: &FixpointMap, l: &[f64], tl: &[f64], res: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = map.len();
    let f: Vec<f64> = tl.iter().zip(l).map(|(a, b)| a - b).collect();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            if j == 0 {
                return vec![0.0; n];
            }
            let step = 1e-7 * l[j].abs().max(1.0);
            let mut lp = l.to_vec();
            lp[j] += step;
            let tp = map.apply(&lp);
            tp.iter().zip(tl).map(|(a, b)| (a - b) / step).collect()
        })
        .collect();
    // A = I − T′, with the row for t = 0 pinned.
    let mut a = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            a[i * n + j] = if i == j { 1.0 } else { 0.0 } - col[i];
        }
    }
    a[..n].fill(0.0);
    a[0] = 1.0;
    let mut rhs = f;
    rhs[0] = 0.0;
    let dir = lu_solve(a, n, rhs)?;
    let mut lam = 1.0;
    loop {
        let cand: Vec<f64> = l.iter().zip(&dir).map(|(x, d)| x + lam * d).collect();
        let tc = map.apply(&cand);
        let rc = sup_diff(&tc, &cand);
        if rc < res || lam < 1e-4 {
            return Ok((cand, tc, rc));
        }
        lam *= 0.5;
    }
}

/// Solves the integral equation for `ln ψ` on a uniform grid of `grid_size`
/// points over `[0, t_max]`, starting from the Gaussian `½ Var(Z) t²`.
/// Iterates until applying the map moves the table by less than `tol`.
/// Failure to get there within `max_iter` steps is reported through
/// `converged = false`, not as an error.
pub fn fixpoint_psi(t_max: f64, grid_size: usize, tol: f64, max_iter: usize) -> Result<MgfTable> {
    if !(t_max > 0.0 && t_max <= 15.0) {
        return Err(domain("T", t_max, "0 < T <= 15"));
    }
    if grid_size < 4 {
        return Err(Error::Invalid(format!("grid size {grid_size} is below 4")));
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "tol > 0"));
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| t_max * i as f64 / (grid_size - 1) as f64)
        .collect();
    let map = FixpointMap::new(grid.clone());
    let mut l: Vec<f64> = grid.iter().map(|t| 0.5 * VAR_Z * t * t).collect();
    let mut tl = map.apply(&l);
    let mut res = sup_diff(&tl, &l);
    let mut iterations = 0;
    while res >= tol && iterations < max_iter {
        let (nl, ntl, nres) = newton_step(&map, &l, &tl, res)?;
        iterations += 1;
        let stalled = nres >= res;
        l = nl;
        tl = ntl;
        res = nres;
        if stalled {
            break;
        }
    }
    // A final plain sweep: its change is the reported residual.
    if res < 1e-6 {
        let next = map.apply(&tl);
        let r2 = sup_diff(&next, &tl);
        if r2 <= res {
            l = tl;
            res = r2;
            iterations += 1;
        }
    }
    Ok(MgfTable { grid, ln_psi: l, iterations, residual: res, converged: res < tol })
}

/// Smallest `a ≥ 0` with `|ln ψ(t) − (J(t) − t²)| ≤ a t` on the grid points in `[t_min, T]`.
pub fn fit_slack(table: &MgfTable, t_min: f64) -> Result<f64> {
    if !(t_min >= 1.0) {
        return Err(domain("tMin", t_min, "tMin >= 1"));
    }
    if t_min > table.t_max() {
        return Err(domain("tMin", t_min, "tMin <= T"));
    }
    Ok(table
        .grid
        .iter()
        .zip(&table.ln_psi)
        .filter(|(t, _)| **t >= t_min)
        .map(|(&t, &l)| (l - (specfun::j(t) - t * t)).abs() / t)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lnhpsi_examples() {
        assert_eq!(lnhpsi(0.5, HpsiVariant::Minus), 0.0);
        assert_eq!(lnhpsi(1.0, HpsiVariant::Plus), 0.0);
        let e = std::f64::consts::E;
        let want = (1.0 - 1.0 / e).ln() + 6.118_233_079_291_906_8 - 4.0 - 2.0 * ALPHA - 2f64.ln();
        assert!((lnhpsi(2.0, HpsiVariant::Minus) - want).abs() < 1e-13);
        for t in [1.01, 2.0, 5.0, 14.0] {
            assert!(lnhpsi(t, HpsiVariant::Minus) < lnhpsi(t, HpsiVariant::Plus));
        }
    }

    #[test]
    fn drop_matches_difference() {
        for (t, a) in [(6.0, 0.3), (8.0, 2.5), (10.0, 1e-6)] {
            for v in [HpsiVariant::Minus, HpsiVariant::Plus] {
                let direct = lnhpsi(t - a, v) - lnhpsi(t, v);
                let d = lnhpsi_drop(t, a, v);
                assert!((d - direct).abs() < 1e-9 * direct.abs().max(1.0), "{t} {a}");
            }
        }
    }

    #[test]
    fn lambda_ratio_examples() {
        // mpmath oracle: ratio − 1 at t = 8 is −6.30e−6 (minus) and 1.84e−5 (plus)
        let m = lambda_ratio(8.0, HpsiVariant::Minus, 1e-12).unwrap();
        let p = lambda_ratio(8.0, HpsiVariant::Plus, 1e-12).unwrap();
        assert!(m.ratio < 1.0 && p.ratio > 1.0);
        assert!((m.ratio_minus_one / -6.30e-6 - 1.0).abs() < 2e-3, "{}", m.ratio_minus_one);
        assert!((p.ratio_minus_one / 1.84e-5 - 1.0).abs() < 2e-3, "{}", p.ratio_minus_one);
        let m12 = lambda_ratio(12.0, HpsiVariant::Minus, 1e-12).unwrap();
        assert!(m12.ratio < 1.0 && (m12.ratio - 1.0).abs() <= 1e-3);
        assert!(lambda_ratio(2.5, HpsiVariant::Minus, 1e-9).is_err());
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let r = lambda_ratio(6.0, HpsiVariant::Minus, 1e-30).unwrap();
        assert!(!r.converged);
        assert!(r.rel_err > 1e-30);
    }

    #[test]
    fn baseline_series() {
        // 2(Ei(3) − γ − ln 3 − 3), Ei(3) = 9.933832570625416
        let want = 2.0 * (9.933_832_570_625_416 - specfun::EULER_GAMMA - 3f64.ln() - 3.0);
        assert!((baseline(3.0) - want).abs() < 1e-13);
        assert_eq!(baseline(0.0), 0.0);
    }

    #[test]
    fn cubic_reproduces_quartic_slopes_and_stays_monotone() {
        let x: Vec<f64> = (0..8).map(|i| 0.5 * f64::from(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let p = MonotoneCubic::new(&x, &y);
        assert!((p.eval(2.3) - 5.6).abs() < 1e-14);
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let p = MonotoneCubic::new(&x, &y);
        assert!((p.eval(2.3) - 2.3f64.powi(3)).abs() < 1e-12);
        let step = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let x: Vec<f64> = (0..6).map(f64::from).collect();
        let q = MonotoneCubic::new(&x, &step);
        let mut prev = -1.0;
        for i in 0..=50 {
            let v = q.eval(i as f64 * 0.1);
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn lu_solves_small_system() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = lu_solve(a, 3, vec![5.0, 3.0, 4.0]).unwrap();
        for (v, w) in x.iter().zip([1.0, 2.0, 1.0]) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn small_fixpoint_table() {
        let t = fixpoint_psi(4.0, 41, 1e-9, 30).unwrap();
        assert!(t.converged, "residual {}", t.residual);
        assert_eq!(t.ln_psi[0], 0.0);
        assert!(t.min_second_difference() >= -1e-9);
        assert!(t.is_nondecreasing());
        // curvature at the origin is Var(Z)
        let c = 2.0 * t.ln_psi[1] / (t.grid[1] * t.grid[1]);
        assert!((c / VAR_Z - 1.0).abs() < 0.05, "{c}");
    }

    #[test]
    fn slack_of_exact_shape_is_zero() {
        let grid: Vec<f64> = (0..=20).map(|i| 1.0 + 0.5 * i as f64).collect();
        let vals = grid.iter().map(|&t| specfun::j(t) - t * t).collect();
        let table = MgfTable::from_values(grid, vals).unwrap();
        assert!(fit_slack(&table, 1.0).unwrap() < 1e-12);
        assert!(fit_slack(&table, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(fixpoint_psi(16.0, 64, 1e-9, 5).is_err());
        assert!(fixpoint_psi(4.0, 3, 1e-9, 5).is_err());
    }
}
