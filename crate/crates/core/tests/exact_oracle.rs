//! The dynamic program against direct enumeration and closed forms.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use quicktail::exactdist::{self, exact_pmf, ArithMode, Denom};
use quicktail::specfun;

/// Comparisons made by QuickSort with the first element as pivot.
fn quicksort_comparisons(v: &[u8]) -> u64 {
    if v.len() < 2 {
        return 0;
    }
    let pivot = v[0];
    let (lo, hi): (Vec<u8>, Vec<u8>) = v[1..].iter().partition(|&&x| x < pivot);
    (v.len() - 1) as u64 + quicksort_comparisons(&lo) + quicksort_comparisons(&hi)
}

/// Visits every permutation of `v` (Heap's algorithm).
fn for_each_permutation(v: &mut [u8], f: &mut impl FnMut(&[u8])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    f(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            f(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn dp_equals_enumeration_up_to_eight() {
    for n in 0..=8usize {
        let mut hist = vec![0u64; n * n.saturating_sub(1) / 2 + 1];
        let mut v: Vec<u8> = (0..n as u8).collect();
        for_each_permutation(&mut v, &mut |p| hist[quicksort_comparisons(p) as usize] += 1);
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        for (k, &c) in hist.iter().enumerate() {
            assert_eq!(pmf.count(k as u64).unwrap(), BigUint::from(c), "n={n}, k={k}");
        }
        assert_eq!(hist.iter().sum::<u64>(), (1..=n as u64).product::<u64>());
    }
}

#[test]
fn rational_mean_is_mu_up_to_25() {
    let table = exactdist::exact_pmf_table(25, ArithMode::Rational, Default::default()).unwrap();
    for (n, pmf) in table.iter().enumerate() {
        assert_eq!(pmf.total_mass_exact().unwrap(), BigRational::one(), "n={n}");
        assert_eq!(pmf.mean_exact().unwrap(), specfun::mu_exact(n as u64), "n={n}");
        let law = pmf.scaled(Denom::N);
        let centred: BigRational = pmf
            .values()
            .map(|k| law.atom_exact(k) * pmf.prob_exact(k).unwrap())
            .fold(BigRational::zero(), |a, b| a + b);
        assert!(centred.is_zero(), "n={n}");
    }
}

#[test]
fn path_probability_up_to_12() {
    for n in 1..=12usize {
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        let top = (n * (n - 1) / 2) as u64;
        assert_eq!(pmf.max_value(), top);
        let want = BigRational::new(
            BigInt::from(1u64 << (n - 1)),
            BigInt::from((1..=n as u64).product::<u64>()),
        );
        assert_eq!(pmf.prob_exact(top).unwrap(), want, "n={n}");
    }
}

#[test]
fn float_mode_at_60() {
    let pmf = exact_pmf(60, ArithMode::Float).unwrap();
    assert!((pmf.total_mass() - 1.0).abs() <= 1e-12);
    assert!((pmf.mean() - specfun::mu(60)).abs() <= 1e-9);
    assert!(pmf.probs_f64().iter().all(|&p| p >= 0.0));
}

#[test]
fn variance_closed_form_and_limit() {
    let table = exactdist::exact_pmf_table(25, ArithMode::Rational, Default::default()).unwrap();
    for (n, pmf) in table.iter().enumerate().skip(1) {
        // 7n² − 4(n+1)² H_n^{(2)} − 2(n+1) H_n + 13n
        let nn = BigRational::from_integer(BigInt::from(n));
        let h = specfun::harmonic_exact(n as u64).unwrap();
        let h2 = (1..=n as i64)
            .map(|k| BigRational::new(BigInt::one(), BigInt::from(k * k)))
            .fold(BigRational::zero(), |a, b| a + b);
        let n1 = &nn + BigRational::one();
        let seven = BigRational::from_integer(BigInt::from(7));
        let four = BigRational::from_integer(BigInt::from(4));
        let two = BigRational::from_integer(BigInt::from(2));
        let thirteen = BigRational::from_integer(BigInt::from(13));
        let want = &seven * &nn * &nn - &four * &n1 * &n1 * h2 - &two * &n1 * h + thirteen * &nn;
        assert_eq!(pmf.variance_exact().unwrap(), want, "n={n}");
    }
    let mut last = 0.0;
    for n in [10usize, 20, 40, 100, 160] {
        let v = exact_pmf(n, ArithMode::Float).unwrap().scaled(Denom::N).variance();
        assert!(v > last && v < specfun::VAR_Z, "n={n}");
        last = v;
    }
    assert!((last / specfun::VAR_Z - 1.0).abs() < 0.15, "{last}");
}

#[test]
fn perfect_trees() {
    for (n, want) in [(3usize, "1/3"), (7, "1/63"), (15, "1/59535")] {
        let t = exactdist::perfect_tree(n).unwrap();
        assert_eq!(t.min_prob, want);
        let pmf = exact_pmf(n, ArithMode::Rational).unwrap();
        assert_eq!(pmf.offset(), t.min_value);
        let dp = pmf.prob_exact(t.min_value).unwrap().to_f64().unwrap();
        assert!((t.series_prob / dp - 1.0).abs() < 1e-6);
        assert!((t.series_prob_shifted / dp - 1.0).abs() > 1e-2);
    }
    assert!(exactdist::perfect_tree(6).is_err());
}
