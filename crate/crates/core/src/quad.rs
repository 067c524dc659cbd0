//! Gauss–Legendre quadrature: fixed rules, a globally adaptive integrator,
//! and a log-space variant for integrands whose magnitude overflows `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th root (descending order).
            let mut x = ((i as f64 + 0.75) / (nf + 0.5) * std::f64::consts::PI).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// `ln ∫_a^b exp(ln_f)` evaluated without forming `exp(ln_f)` directly.
    pub fn ln_integrate<F: Fn(f64) -> f64>(&self, ln_f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w.ln() + ln_f(mid + half * x))
            .collect();
        log_sum_exp(&terms) + half.ln()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Shared 10-point rule, used where the integrand is a low-degree perturbation of a constant.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty slice or all `-inf` terms.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub abs_err: f64,
    pub panels: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_err
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnQuadResult {
    /// Natural log of the integral.
    pub ln_value: f64,
    /// Estimated relative error of the integral (not of its log).
    pub rel_err: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Legendre integration over the panels defined by
/// `breaks` (ascending, at least two points). The panel with the largest
/// error estimate is bisected until `Σ err ≤ rel_tol · |Σ value|` or
/// `max_panels` is reached.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    let rule = gl20();
    let estimate = |a: f64, b: f64| -> Panel {
        let coarse = rule.integrate(&f, a, b);
        let m = 0.5 * (a + b);
        let fine = rule.integrate(&f, a, m) + rule.integrate(&f, m, b);
        Panel { a, b, value: fine, err: (fine - coarse).abs() }
    };
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(estimate(w[0], w[1]));
        }
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        let done = err <= rel_tol * total.abs() || err == 0.0;
        if done || heap.len() >= max_panels {
            return QuadResult { value: total, abs_err: err, panels: heap.len(), converged: done };
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Panel is at floating-point resolution; keep it and stop.
            heap.push(worst);
            let total: f64 = heap.iter().map(|p| p.value).sum();
            let err: f64 = heap.iter().map(|p| p.err).sum();
            return QuadResult { value: total, abs_err: err, panels: heap.len(), converged: false };
        }
        heap.push(estimate(worst.a, m));
        heap.push(estimate(m, worst.b));
    }
}

/// Log-space counterpart of [`adaptive`]: `ln_f` returns the log of a
/// nonnegative integrand. Panel values and errors are kept as logs so
/// integrands like `exp(J(t))` with `J(t) ~ 10^5` stay representable.
pub fn adaptive_ln<F: Fn(f64) -> f64>(
    ln_f: F,
    breaks: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> LnQuadResult {
    let rule = gl20();
    // Panel.value / Panel.err hold logs here.
    let estimate = |a: f64, b: f64| -> Panel {
        let coarse = rule.ln_integrate(&ln_f, a, b);
        let m = 0.5 * (a + b);
        let fine = log_add_exp(rule.ln_integrate(&ln_f, a, m), rule.ln_integrate(&ln_f, m, b));
        let err = if fine == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            fine + (coarse - fine).exp_m1().abs().ln()
        };
        Panel { a, b, value: fine, err }
    };
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(estimate(w[0], w[1]));
        }
    }
    let summarize = |heap: &BinaryHeap<Panel>, converged: bool| {
        let vals: Vec<f64> = heap.iter().map(|p| p.value).collect();
        let errs: Vec<f64> = heap.iter().map(|p| p.err).collect();
        let lv = log_sum_exp(&vals);
        let le = log_sum_exp(&errs);
        let rel = if lv == f64::NEG_INFINITY { 0.0 } else { (le - lv).exp() };
        LnQuadResult { ln_value: lv, rel_err: rel, panels: heap.len(), converged }
    };
    loop {
        let snapshot = summarize(&heap, false);
        let done = snapshot.rel_err <= rel_tol;
        if done || heap.len() >= max_panels {
            return LnQuadResult { converged: done, ..snapshot };
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            return summarize(&heap, false);
        }
        heap.push(estimate(worst.a, m));
        heap.push(estimate(m, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = r.integrate(|x| x.powi(9) + x.powi(8), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let s: f64 = r.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn twenty_point_nodes_symmetric() {
        let r = gl20();
        for i in 0..20 {
            assert!((r.nodes()[i] + r.nodes()[19 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x^2) dx = 100 atan(100)
        let q = adaptive(|x| 1.0 / (1e-4 + x * x), &[0.0, 1.0], 1e-12, 10_000);
        assert!(q.converged);
        let exact = 100.0 * 100f64.atan();
        assert!((q.value - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn ln_adaptive_matches_linear_space() {
        let q = adaptive_ln(|x| 900.0 - x, &[0.0, 10.0, 50.0], 1e-13, 1000);
        // ln ∫ e^{900 - x} = 900 + ln(1 - e^{-50})
        assert!((q.ln_value - (900.0 + (-(-50f64).exp()).ln_1p())).abs() < 1e-12);
        assert!(q.rel_err <= 1e-13);
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
