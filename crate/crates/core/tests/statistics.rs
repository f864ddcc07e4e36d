//! Monte Carlo checks against independent oracles. Each test uses a fixed
//! seed, so results are reproducible; tolerances are four standard errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use subset_sketch::analysis::{check_claims, uniform_tau_moments, Claim, TrialPlan};
use subset_sketch::distinct::KmvSketch;
use subset_sketch::{draw_ranks, threshold_for_budget, Population, PrioritySketch, SeedSpec, ThresholdSketch};

const Z: f64 = 4.0;

/// Sample mean, sample variance and the standard errors of both.
struct Summary {
    mean: f64,
    mean_se: f64,
    var: f64,
    var_se: f64,
}

fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    Summary {
        mean,
        mean_se: (m2 / (n - 1.0)).sqrt(),
        var: m2 * n / (n - 1.0),
        var_se: ((m4 - m2 * m2) / n).sqrt(),
    }
}

fn within(value: f64, target: f64, se: f64) -> bool {
    (value - target).abs() <= Z * se
}

#[test]
fn threshold_total_is_unbiased() {
    let pop = Population::from_weights(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let tau = threshold_for_budget(&pop, 2).unwrap();
    let totals: Vec<f64> = (0..1_000_000u64)
        .map(|s| {
            ThresholdSketch::build(&draw_ranks(&pop, SeedSpec(s)), tau)
                .unwrap()
                .ht_estimate(|_| true)
        })
        .collect();
    let s = summarize(&totals);
    assert!(within(s.mean, 10.0, s.mean_se), "mean {} se {}", s.mean, s.mean_se);
    // Var of the HT total is sum w^2 (1 - p) / p = 1*4 + 4*1.5 + 9*(2/3) + 16*(1/4)
    assert!(within(s.var, 20.0, s.var_se), "var {} se {}", s.var, s.var_se);
}

#[test]
fn priority_total_and_range_are_unbiased() {
    let pop = Population::from_weights(&[4.0, 3.0, 2.0, 1.0]).unwrap();
    let mut totals = Vec::with_capacity(1_000_000);
    let mut ranges = Vec::with_capacity(100_000);
    for s in 0..1_000_000u64 {
        let sketch = PrioritySketch::build(&draw_ranks(&pop, SeedSpec(s)), 2).unwrap();
        totals.push(sketch.total_estimate());
        if s < 100_000 {
            ranges.push(sketch.subset_estimate(|i| i <= 1));
        }
    }
    let t = summarize(&totals);
    assert!(within(t.mean, 10.0, t.mean_se), "total {} se {}", t.mean, t.mean_se);
    let r = summarize(&ranges);
    assert!(within(r.mean, 7.0, r.mean_se), "range {} se {}", r.mean, r.mean_se);
}

/// Priority sampling written out from its definition with an unrelated
/// generator: sort by `u / w`, keep k, weight by `w / min(1, w * tau)`.
fn reference_priority(weights: &[f64], k: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let mut ranked: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (rng.gen_range(f64::MIN_POSITIVE..1.0) / w, i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tau = ranked[k].0;
    let mut out = vec![0.0; weights.len()];
    for &(_, i) in &ranked[..k] {
        let w = weights[i];
        out[i] = w / (w * tau).min(1.0);
    }
    out
}

#[test]
fn reference_implementation_agrees_on_item_means() {
    let weights = [5.0, 1.0, 0.5, 3.0, 0.25, 2.0];
    let k = 3;
    let trials = 400_000;
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let reference: Vec<Vec<f64>> = (0..trials).map(|_| reference_priority(&weights, k, &mut rng)).collect();
    let pop = Population::from_weights(&weights).unwrap();
    let ours: Vec<PrioritySketch> = (0..trials as u64)
        .map(|s| PrioritySketch::build(&draw_ranks(&pop, SeedSpec(s)), k).unwrap())
        .collect();
    for (i, &w) in weights.iter().enumerate() {
        let r = summarize(&reference.iter().map(|d| d[i]).collect::<Vec<_>>());
        let o = summarize(&ours.iter().map(|s| s.estimate_of(i as u64)).collect::<Vec<_>>());
        assert!(within(r.mean, w, r.mean_se), "reference item {i}: {} vs {w}", r.mean);
        assert!(within(o.mean, w, o.mean_se), "item {i}: {} vs {w}", o.mean);
        // same distribution: variances agree within their combined SE
        assert!(
            (r.var - o.var).abs() <= Z * r.var_se.hypot(o.var_se),
            "item {i}: variance {} vs reference {}",
            o.var,
            r.var
        );
    }
}

#[test]
fn tight_bound_holds_for_three_of_four() {
    let pop = Population::from_weights(&[4.0, 3.0, 2.0, 1.0]).unwrap();
    let totals: Vec<f64> = (0..1_000_000u64)
        .map(|s| PrioritySketch::build(&draw_ranks(&pop, SeedSpec(s)), 3).unwrap().total_estimate())
        .collect();
    let s = summarize(&totals);
    // (100 - 30) / 2 - (2^2 + 1^2)
    assert!(s.var <= 30.0 + Z * s.var_se, "var {} se {}", s.var, s.var_se);
}

/// `1 / tau` for the `(k+1)`-st smallest of `n` uniforms from ChaCha20.
fn inverse_order_statistic(n: usize, k: usize, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buf = vec![0.0f64; n];
    (0..draws)
        .map(|_| {
            buf.iter_mut().for_each(|u| *u = rng.gen::<f64>());
            let (_, tau, _) = buf.select_nth_unstable_by(k, f64::total_cmp);
            1.0 / *tau
        })
        .collect()
}

#[test]
fn uniform_inverse_tau_moments_match_order_statistic_simulation() {
    for (n, k, draws) in [(1000, 100, 100_000), (100, 10, 200_000), (40, 8, 200_000)] {
        let m = uniform_tau_moments(n, k).unwrap();
        let s = summarize(&inverse_order_statistic(n, k, draws, n as u64));
        assert!(within(s.mean, m.mean_inv_tau, s.mean_se), "({n},{k}) mean {} vs {}", s.mean, m.mean_inv_tau);
        let v = m.var_inv_tau.unwrap();
        assert!(within(s.var, v, s.var_se), "({n},{k}) var {} se {} vs {v}", s.var, s.var_se);
    }
}

#[test]
fn harness_passes_on_small_examples() {
    let pop = Population::from_weights(&[4.0, 3.0, 2.0, 1.0]).unwrap();
    let report = check_claims(&pop, &TrialPlan::new(1_000_000, 5, 2)).unwrap();
    for c in report.checks_for(Claim::Fact1Mean).chain(report.checks_for(Claim::Fact1PairProduct)) {
        assert!(c.passed(), "{c:?}");
    }
    assert_eq!(report.checks_for(Claim::Fact1PairProduct).count(), 6);
    // E[1/tau] <= 5 with room to spare
    let c2 = report.checks_for(Claim::Claim2MeanInvTau).next().unwrap();
    assert!(c2.margin_se >= Z, "{c2:?}");
    for c in report.checks_for(Claim::Claim7MeanInvTauExcluding) {
        assert!(c.passed(), "{c:?}");
    }

    let ones = Population::from_weights(&[1.0; 5]).unwrap();
    let report = check_claims(&ones, &TrialPlan::new(200_000, 6, 2)).unwrap();
    let item_checks: Vec<_> = report.checks_for(Claim::Claim1ItemVariance).collect();
    assert_eq!(item_checks.len(), 5);
    assert!(item_checks.iter().all(|c| c.passed()), "{item_checks:?}");
}

#[test]
fn kmv_estimate_and_spread_over_hash_seeds() {
    let (d, k) = (10_000u32, 64usize);
    let estimates: Vec<f64> = (0..200u64)
        .map(|seed| {
            let mut s = KmvSketch::new(k, seed).unwrap();
            (0..d).for_each(|i| s.insert(&i.to_le_bytes()));
            assert_eq!(s.retained(), k + 1);
            s.estimate()
        })
        .collect();
    let s = summarize(&estimates);
    let df = d as f64;
    assert!(within(s.mean, df, s.mean_se), "mean {} se {}", s.mean, s.mean_se);
    let predicted = ((df - k as f64) / (df * (k as f64 - 1.0))).sqrt();
    let rel_sd = s.var.sqrt() / df;
    assert!((rel_sd / predicted - 1.0).abs() <= 0.25, "rel sd {rel_sd} vs {predicted}");
}

#[test]
fn kmv_epsilon_guarantee() {
    // k = ceil(4 / eps^2) at eps = 0.25
    let (eps, k, d, runs) = (0.25, 64usize, 1_000u32, 20_000u64);
    let hits = (0..runs)
        .filter(|&seed| {
            let mut s = KmvSketch::new(k, seed).unwrap();
            (0..d).for_each(|i| s.insert(&i.to_le_bytes()));
            (s.estimate() / d as f64 - 1.0).abs() <= eps
        })
        .count();
    let rate = hits as f64 / runs as f64;
    assert!(rate >= 0.95, "success rate {rate}");
}
