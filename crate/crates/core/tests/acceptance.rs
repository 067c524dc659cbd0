//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use quicktail::bounds;
use quicktail::exactdist::{self, exact_pmf, ArithMode, Denom};
use quicktail::largedev::{self, LdWindow, TailSource};
use quicktail::limitmgf::{self, HpsiVariant};
use quicktail::sampler;
use quicktail::specfun::{self, SeriesTerms};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn quicksort_comparisons(v: &[u8]) -> u64 {
    if v.len() < 2 {
        return 0;
    }
    let (lo, hi): (Vec<u8>, Vec<u8>) = v[1..].iter().partition(|&&x| x < v[0]);
    (v.len() - 1) as u64 + quicksort_comparisons(&lo) + quicksort_comparisons(&hi)
}

fn permutations(n: usize, f: &mut impl FnMut(&[u8])) {
    let mut v: Vec<u8> = (0..n as u8).collect();
    let mut c = vec![0usize; n];
    f(&v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            v.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            f(&v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    for n in 0..=8usize {
        let mut hist = vec![0u64; n * n.saturating_sub(1) / 2 + 1];
        permutations(n, &mut |p| hist[quicksort_comparisons(p) as usize] += 1);
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        ok &= hist
            .iter()
            .enumerate()
            .all(|(k, &c)| pmf.count(k as u64).unwrap() == BigUint::from(c));
    }
    let t = start.elapsed();
    outcome(ok && t < Duration::from_secs(30), format!("n ≤ 8 enumerated in {:.2}s", t.as_secs_f64()))
}

fn c2() -> Outcome {
    let table = exactdist::exact_pmf_table(25, ArithMode::Rational, Default::default()).unwrap();
    let bad: Vec<usize> = (0..=25)
        .filter(|&n| table[n].mean_exact().unwrap() != specfun::mu_exact(n as u64))
        .collect();
    outcome(bad.is_empty(), format!("n ≤ 25, mismatches {bad:?}"))
}

fn c3() -> Outcome {
    let start = Instant::now();
    let b = sampler::sample_batch(10_000, 30_000, 20_240_601, &[]).unwrap();
    let t = start.elapsed();
    let rel = b.variance() / specfun::VAR_Z - 1.0;
    outcome(
        rel.abs() <= 0.05 && t < Duration::from_secs(120),
        format!("var = {:.5}, relative gap {rel:+.4}, {:.1}s", b.variance(), t.as_secs_f64()),
    )
}

fn c4() -> Outcome {
    let ok = (1..=12usize).all(|n| {
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        pmf.prob_exact((n * (n - 1) / 2) as u64).unwrap() == exactdist::path_probability(n)
    });
    outcome(ok, "n ≤ 12")
}

fn c5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, want) in [(3usize, Some("1/3")), (7, Some("1/63")), (15, None)] {
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        let dp = pmf.prob_exact(pmf.offset()).unwrap();
        let dp_s = exactdist::format_rational(&dp);
        let tree = exactdist::perfect_tree(n).unwrap();
        let dp_f = dp.to_f64().unwrap();
        let rel = (tree.series_prob / dp_f - 1.0).abs();
        let rel_shift = (tree.series_prob_shifted / dp_f - 1.0).abs();
        let flagged = rel_shift > 1e-6;
        ok &= want.is_none_or(|w| w == dp_s) && tree.min_prob == dp_s && rel <= 1e-6 && flagged;
        parts.push(format!("n={n}: {dp_s}, s(N) rel {rel:.1e}, s(N+1) rel {rel_shift:.3} flagged"));
    }
    outcome(ok, parts.join("; "))
}

fn c6() -> Outcome {
    let s1 = specfun::s_series(1.0, 1e-17).unwrap();
    outcome((s1 - 0.945_755_3).abs() <= 5e-8, format!("s(1) = {s1:.10}"))
}

fn c7() -> Outcome {
    let e = std::f64::consts::E;
    let w1 = specfun::solve_w(2.0 * e).unwrap().w;
    let w2 = specfun::solve_w(e * e).unwrap().w;
    let mut worst: f64 = 0.0;
    for x in bounds::log_grid(2.0 * e, 1e12, 20) {
        let s = specfun::solve_w(x).unwrap();
        worst = worst.max((2.0 * s.w.exp() / s.w - x).abs() / x);
    }
    outcome(
        (w1 - 1.0).abs() <= 1e-12 && (w2 - 2.0).abs() <= 1e-12 && worst <= 1e-12,
        format!("w(2e)−1 = {:.1e}, w(e²)−2 = {:.1e}, max residual/x = {worst:.1e}", w1 - 1.0, w2 - 2.0),
    )
}

fn c8() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=70 {
        let t = 30.0 + i as f64;
        let s = specfun::j_series(t, SeriesTerms::Auto).unwrap().value;
        let q = specfun::j_quad(t, 1e-13).unwrap().value;
        worst = worst.max((s / q - 1.0).abs());
    }
    let w = specfun::solve_w(1e6).unwrap().w;
    let r = specfun::j(w) / 1e6;
    outcome(
        worst <= 1e-6 && (0.9..=1.1).contains(&r),
        format!("max series/quad gap {worst:.1e} on [30,100]; J(w(1e6))/1e6 = {r:.4}"),
    )
}

fn c9() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_err: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..=16 {
        let t = 6.0 + 0.5 * i as f64;
        let m = limitmgf::lambda_ratio(t, HpsiVariant::Minus, 1e-12).unwrap();
        let p = limitmgf::lambda_ratio(t, HpsiVariant::Plus, 1e-12).unwrap();
        ok &= m.ratio_minus_one < 0.0 && p.ratio_minus_one > 0.0;
        worst_err = worst_err.max(m.rel_err).max(p.rel_err);
        if t >= 8.0 {
            worst_gap = worst_gap.max(m.ratio_minus_one.abs()).max(p.ratio_minus_one.abs());
        }
    }
    let t = start.elapsed();
    outcome(
        ok && worst_err <= 1e-9 && worst_gap <= 1e-3 && t < Duration::from_secs(60),
        format!("t ∈ [6,14]: max rel err {worst_err:.1e}, max |ratio−1| (t ≥ 8) {worst_gap:.1e}, {:.1}s", t.as_secs_f64()),
    )
}

struct Sandwich {
    table: limitmgf::MgfTable,
    a: f64,
}

fn c10() -> (Outcome, Sandwich) {
    let t1 = limitmgf::fixpoint_psi(12.0, 256, 1e-9, 50).unwrap();
    let t2 = limitmgf::fixpoint_psi(12.0, 512, 1e-9, 50).unwrap();
    let a1 = limitmgf::fit_slack(&t1, 1.0).unwrap();
    let a2 = limitmgf::fit_slack(&t2, 1.0).unwrap();
    let stable = (a2 - a1).abs() / a1 <= 0.2;
    let convex = t1.min_second_difference() >= -1e-9 && t2.min_second_difference() >= -1e-9;
    let o = outcome(
        t1.converged && t2.converged && t1.ln_psi[0] == 0.0 && convex && a1 <= 10.0 && stable,
        format!(
            "residuals {:.1e}/{:.1e}, min Δ² {:.1e}, a = {a1:.5} (G=256), {a2:.5} (G=512)",
            t1.residual,
            t2.residual,
            t1.min_second_difference()
        ),
    );
    (o, Sandwich { table: t1, a: a1 })
}

fn c11(s: &Sandwich) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for n in [20usize, 40] {
        let pmf = exact_pmf(n, ArithMode::Float).unwrap();
        for (&t, &l) in s.table.grid.iter().zip(&s.table.ln_psi) {
            let m = exactdist::mgf_hat(&pmf, t).unwrap();
            worst = worst.max(m / (l.exp() * (1.0 + 1e-6)));
        }
    }
    outcome(worst <= 1.0, format!("max mgf_hat/(ψ(1+1e−6)) = {worst:.6}"))
}

fn c12(s: &Sandwich) -> Outcome {
    let pmf = exact_pmf(50, ArithMode::Float).unwrap();
    let law = pmf.scaled(Denom::NPlusOne);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=20 {
        let x = 2.0 * std::f64::consts::E + (8.0 - 2.0 * std::f64::consts::E) * i as f64 / 20.0;
        let p = law.tail_prob(x, true);
        let e = if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
        worst = worst.max(e - bounds::sandwich_chernoff(x, s.a).unwrap());
    }
    outcome(worst <= 0.0, format!("a = {:.5}, max (ln tail − bound) = {worst:.3}", s.a))
}

fn c13() -> Outcome {
    let pmfs: Vec<_> = [10usize, 20, 40, 80]
        .iter()
        .map(|&n| exact_pmf(n, ArithMode::Float).unwrap())
        .collect();
    let pairs: Vec<(u64, f64)> = (0..3)
        .map(|i| {
            let d = exactdist::ks_distance(&pmfs[i].scaled(Denom::N), &pmfs[i + 1].scaled(Denom::N));
            (pmfs[i].n() as u64, d)
        })
        .collect();
    let decreasing = pairs.windows(2).all(|w| w[1].1 < w[0].1);
    let c = largedev::fit_ks_constant(&pairs).unwrap();
    let bounded = pairs
        .iter()
        .all(|&(n, d)| d <= largedev::ks_bound(n, c).unwrap() * (1.0 + 1e-12));
    let ds: Vec<String> = pairs.iter().map(|(n, d)| format!("d{n} = {d:.4}")).collect();
    outcome(decreasing && bounded, format!("{}, C = {c:.4}", ds.join(", ")))
}

fn c14() -> Outcome {
    let scaled = |x: f64| bounds::delta_gain(x, 0.0).unwrap() * x / x.ln().powi(2);
    let s8 = scaled(1e8);
    let s10 = scaled(1e10);
    outcome(
        (1.4..=2.6).contains(&s8) && (s10 - 2.0).abs() < (s8 - 2.0).abs(),
        format!("Δ·x/(ln x)² = {s8:.4} at 1e8, {s10:.4} at 1e10"),
    )
}

fn c15() -> Outcome {
    let exact_grid = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 5.5, 6.0, 7.0, 8.0];
    let mc_grid = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0];
    let pmf = exact_pmf(50, ArithMode::Float).unwrap();
    let slacks = largedev::fit_ld_slacks(&exact_grid, TailSource::Exact(&pmf)).unwrap();
    let w50 = LdWindow::new(50, largedev::DEFAULT_C, largedev::DEFAULT_OMEGA).unwrap();
    let exact = largedev::verify_ld(&exact_grid, TailSource::Exact(&pmf), &slacks, &w50).unwrap();
    let batch = sampler::sample_batch(10_000, 300_000, 77, &mc_grid).unwrap();
    let w4 = LdWindow::new(10_000, largedev::DEFAULT_C, largedev::DEFAULT_OMEGA).unwrap();
    let mc = largedev::verify_ld(&mc_grid, TailSource::MonteCarlo(&batch), &slacks, &w4).unwrap();

    let dir = std::env::temp_dir().join(format!("quicktail-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("verify-all.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_quicktail"))
        .args(["verify", "--suite", "all", "--out"])
        .arg(&report)
        .status()
        .unwrap();
    let t = start.elapsed();
    let _ = std::fs::remove_dir_all(&dir);
    let ok = exact.passed() && mc.passed() && status.code() == Some(0) && t < Duration::from_secs(600);
    outcome(
        ok,
        format!(
            "n=50 exact {}, n=1e4 MC {}, `verify --suite all` exit {:?} in {:.0}s",
            if exact.passed() { "ok" } else { "fails" },
            if mc.passed() { "ok" } else { "fails" },
            status.code(),
            t.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "exact law equals permutation enumeration", c1()),
        (2, "exact mean identity", c2()),
        (3, "simulated variance", c3()),
        (4, "path probability", c4()),
        (5, "perfect-tree probability", c5()),
        (6, "series constant s(1)", c6()),
        (7, "saddle point w(x)", c7()),
        (8, "J series and quadrature", c8()),
        (9, "λ-ratio lemma", c9()),
    ];
    let (o10, sandwich) = c10();
    results.push((10, "MGF sandwich", o10));
    results.push((11, "majorization", c11(&sandwich)));
    results.push((12, "Chernoff dominance", c12(&sandwich)));
    results.push((13, "KS decay", c13()));
    results.push((14, "Chernoff gain scaling", c14()));
    results.push((15, "large-deviation envelopes", c15()));

    let mut failed = 0;
    for (k, name, o) in &results {
        println!("{} [{k:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
