//! C interface to `quicktail`.
//!
//! Every function returns a [`QtStatus`]; results go through out-pointers.
//! On failure, [`qt_last_error`] copies a message describing the most recent
//! error on the calling thread. Handles are opaque and must be released with
//! their `_free` function. Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quicktail::exactdist::{self, ArithMode, Denom, ExactPmf};
use quicktail::limitmgf::{self, HpsiVariant, MgfTable};
use quicktail::{bounds, sampler, specfun, Error};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    NoSolution = 3,
    SizeCap = 4,
    Overflow = 5,
    Convergence = 6,
    Invalid = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Arithmetic for exact distributions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtMode {
    Rational = 0,
    Float = 1,
}

/// Scaling of `X_n − μ_n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtDenom {
    /// Divide by `n`.
    N = 0,
    /// Divide by `n + 1`.
    NPlusOne = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtVariant {
    Minus = 0,
    Plus = 1,
}

/// Opaque exact distribution of `X_n`.
pub struct QtPmf(ExactPmf);

/// Opaque fixed-point table of `ln ψ`.
pub struct QtPsiTable(MgfTable);

/// Summary of a Monte Carlo batch of `Z_n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QtSampleSummary {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QtStatus {
    match e {
        Error::Domain { .. } => QtStatus::Domain,
        Error::NoSolution(_) => QtStatus::NoSolution,
        Error::SizeCap { .. } => QtStatus::SizeCap,
        Error::Overflow(_) => QtStatus::Overflow,
        Error::Convergence(_) => QtStatus::Convergence,
        Error::Invalid(_) | Error::Parse { .. } | Error::Json(_) => QtStatus::Invalid,
        Error::Io(_) => QtStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Buffer(usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            QtStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need))) => {
            set_error(format!("buffer too small: {need} elements needed"));
            QtStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            QtStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, need: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len < need {
        return Err(Fail::Buffer(need));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => c"",
    };
    V.as_ptr()
}

/// Copies the last error message of this thread into `buf` (always
/// NUL-terminated when `len > 0`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `μ_n = 2(n+1)H_n − 4n`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_mu(n: u64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = specfun::mu(n);
        Ok(())
    })
}

unsafe fn out_<'a>(p: *mut f64) -> Result<&'a mut f64, Fail> {
    out(p, "out")
}

/// `J(t) = 2(Ei(t) − Ei(1))`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_j(t: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        if !(t > 0.0) {
            return Err(Error::Domain { what: "t", value: t, domain: "t > 0" }.into());
        }
        *out_(out)? = specfun::j(t);
        Ok(())
    })
}

/// Root `w ≥ 1` of `x = 2e^w/w` for `x ≥ 2e`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_solve_w(x: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = specfun::solve_w(x)?.w;
        Ok(())
    })
}

/// `−xw + J(w) − w² + a ln x`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_new_upper_f(x: f64, a: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = bounds::new_upper_f(x, a)?;
        Ok(())
    })
}

/// Gain of the optimal Chernoff abscissa over `w(x)`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_delta_gain(x: f64, a: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = bounds::delta_gain(x, a)?;
        Ok(())
    })
}

/// `λ(t)/ĥψ(t) − 1` and the achieved relative quadrature error.
///
/// # Safety
/// `ratio_minus_one` must be valid for writing; `rel_err` may be null.
#[no_mangle]
pub unsafe extern "C" fn qt_lambda_ratio(
    t: f64,
    variant: QtVariant,
    rel_tol: f64,
    ratio_minus_one: *mut f64,
    rel_err: *mut f64,
) -> QtStatus {
    guard(|| {
        let v = match variant {
            QtVariant::Minus => HpsiVariant::Minus,
            QtVariant::Plus => HpsiVariant::Plus,
        };
        let r = limitmgf::lambda_ratio(t, v, rel_tol)?;
        *out(ratio_minus_one, "ratio_minus_one")? = r.ratio_minus_one;
        if let Some(e) = rel_err.as_mut() {
            *e = r.rel_err;
        }
        Ok(())
    })
}

/// Builds the exact law of `X_n` under the default size caps.
///
/// # Safety
/// `out` must be valid for writing; the handle must be freed with [`qt_pmf_free`].
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_new(n: usize, mode: QtMode, out: *mut *mut QtPmf) -> QtStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let m = match mode {
            QtMode::Rational => ArithMode::Rational,
            QtMode::Float => ArithMode::Float,
        };
        *slot = Box::into_raw(Box::new(QtPmf(exactdist::exact_pmf(n, m)?)));
        Ok(())
    })
}

/// Releases a handle from [`qt_pmf_new`]; null is ignored.
///
/// # Safety
/// `pmf` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_free(pmf: *mut QtPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

/// Smallest support point and number of support points.
///
/// # Safety
/// `pmf` must be a live handle; `offset` and `len` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_support(pmf: *const QtPmf, offset: *mut u64, len: *mut usize) -> QtStatus {
    guard(|| {
        let p = &get(pmf, "pmf")?.0;
        *out(offset, "offset")? = p.offset();
        *out(len, "len")? = p.len();
        Ok(())
    })
}

/// Copies `P(X_n = offset + i)` for every support index into `probs`.
///
/// # Safety
/// `pmf` must be a live handle; `probs` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_probs(pmf: *const QtPmf, probs: *mut f64, len: usize) -> QtStatus {
    guard(|| {
        let p = &get(pmf, "pmf")?.0;
        let dst = slice_mut(probs, len, p.len(), "probs")?;
        dst.copy_from_slice(&p.probs_f64());
        Ok(())
    })
}

/// Mean and variance of `X_n`.
///
/// # Safety
/// `pmf` must be a live handle; `mean` and `variance` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_moments(pmf: *const QtPmf, mean: *mut f64, variance: *mut f64) -> QtStatus {
    guard(|| {
        let p = &get(pmf, "pmf")?.0;
        *out(mean, "mean")? = p.mean();
        *out(variance, "variance")? = p.variance();
        Ok(())
    })
}

/// `P((X_n − μ_n)/d > x)`, or `≥` when `strict` is false.
///
/// # Safety
/// `pmf` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_tail(
    pmf: *const QtPmf,
    denom: QtDenom,
    x: f64,
    strict: bool,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let p = &get(pmf, "pmf")?.0;
        let d = match denom {
            QtDenom::N => Denom::N,
            QtDenom::NPlusOne => Denom::NPlusOne,
        };
        *out_(out)? = p.scaled(d).tail_prob(x, strict);
        Ok(())
    })
}

/// Kolmogorov distance between two scaled laws.
///
/// # Safety
/// Both handles must be live; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_pmf_ks_distance(
    a: *const QtPmf,
    b: *const QtPmf,
    denom: QtDenom,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let d = match denom {
            QtDenom::N => Denom::N,
            QtDenom::NPlusOne => Denom::NPlusOne,
        };
        let a = &get(a, "a")?.0;
        let b = &get(b, "b")?.0;
        *out_(out)? = exactdist::ks_distance(&a.scaled(d), &b.scaled(d));
        Ok(())
    })
}

/// Solves the fixed-point equation for `ln ψ` on `grid` points over `[0, t_max]`.
/// An unconverged table is still returned, with status `Convergence`.
///
/// # Safety
/// `out` must be valid for writing; the handle must be freed with [`qt_psi_free`].
#[no_mangle]
pub unsafe extern "C" fn qt_psi_new(
    t_max: f64,
    grid: usize,
    tol: f64,
    max_iter: usize,
    out: *mut *mut QtPsiTable,
) -> QtStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let t = limitmgf::fixpoint_psi(t_max, grid, tol, max_iter)?;
        let converged = t.converged;
        let residual = t.residual;
        *slot = Box::into_raw(Box::new(QtPsiTable(t)));
        if converged {
            Ok(())
        } else {
            Err(Error::Convergence(format!("residual {residual} above {tol}")).into())
        }
    })
}

/// Releases a handle from [`qt_psi_new`]; null is ignored.
///
/// # Safety
/// `table` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qt_psi_free(table: *mut QtPsiTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of grid points.
///
/// # Safety
/// `table` must be a live handle; `len` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_psi_len(table: *const QtPsiTable, len: *mut usize) -> QtStatus {
    guard(|| {
        *out(len, "len")? = get(table, "table")?.0.grid.len();
        Ok(())
    })
}

/// Copies the grid and the `ln ψ` values.
///
/// # Safety
/// `table` must be a live handle; `t` and `ln_psi` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_psi_values(
    table: *const QtPsiTable,
    t: *mut f64,
    ln_psi: *mut f64,
    len: usize,
) -> QtStatus {
    guard(|| {
        let tb = &get(table, "table")?.0;
        let n = tb.grid.len();
        slice_mut(t, len, n, "t")?.copy_from_slice(&tb.grid);
        slice_mut(ln_psi, len, n, "ln_psi")?.copy_from_slice(&tb.ln_psi);
        Ok(())
    })
}

/// Interpolated `ln ψ(t)` inside the table range.
///
/// # Safety
/// `table` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_psi_eval(table: *const QtPsiTable, t: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = get(table, "table")?.0.eval(t)?;
        Ok(())
    })
}

/// Smallest `a` with `|ln ψ(t) − (J(t) − t²)| ≤ a t` on grid points `t ≥ t_min`.
///
/// # Safety
/// `table` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_psi_fit_slack(table: *const QtPsiTable, t_min: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        *out_(out)? = limitmgf::fit_slack(&get(table, "table")?.0, t_min)?;
        Ok(())
    })
}

/// Draws `reps` samples of `Z_n` and counts exceedances of each threshold.
///
/// # Safety
/// `thresholds` and `counts` must be valid for `k` elements (may be null
/// when `k = 0`); `summary` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qt_sample(
    n: u64,
    reps: usize,
    seed: u64,
    thresholds: *const f64,
    counts: *mut u64,
    k: usize,
    summary: *mut QtSampleSummary,
) -> QtStatus {
    guard(|| {
        let xs: &[f64] = if k == 0 {
            &[]
        } else if thresholds.is_null() {
            return Err(Fail::Null("thresholds"));
        } else {
            std::slice::from_raw_parts(thresholds, k)
        };
        let dst = slice_mut(counts, k, k, "counts")?;
        let slot = out(summary, "summary")?;
        let b = sampler::sample_batch(n, reps, seed, xs)?;
        for (d, t) in dst.iter_mut().zip(&b.tail_counts) {
            *d = t.count;
        }
        *slot = QtSampleSummary {
            count: b.count,
            mean: b.mean,
            variance: b.variance(),
            min: b.min,
            max: b.max,
        };
        Ok(())
    })
}
