//! Simulated laws against exact ones.

use quicktail::exactdist::{exact_pmf, ArithMode};
use quicktail::largedev;
use quicktail::sampler;

#[test]
fn empirical_cdf_at_50_matches_exact() {
    let count = 1_000_000;
    let pmf = exact_pmf(50, ArithMode::Float).unwrap();
    let mut draws = sampler::sample_values(50, count, 424_242);
    draws.sort_unstable();
    let mut cdf = 0.0;
    let mut d: f64 = 0.0;
    for (k, p) in pmf.values().zip(pmf.probs_f64()) {
        let below = draws.partition_point(|&x| x < k) as f64 / count as f64;
        let upto = draws.partition_point(|&x| x <= k) as f64 / count as f64;
        d = d.max((below - cdf).abs());
        cdf += p;
        d = d.max((upto - cdf).abs());
    }
    assert!(d <= 1.95 * 2.0 / (count as f64).sqrt(), "KS = {d}");
}

#[test]
fn batches_reproduce_across_pools() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sampler::sample_batch(1000, 3000, 99, &[0.0, 1.0, 2.0]).unwrap())
    };
    let a = run(1);
    for t in [2, 4, 7] {
        let b = run(t);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
#[ignore = "needs about 10^11 random draws"]
fn tails_stabilize_in_n() {
    let rows = largedev::stabilization(&[1_000, 10_000, 100_000], 2.0, 100_000, 5).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap.unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}
