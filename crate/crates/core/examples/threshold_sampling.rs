//! Threshold sampling with a budget-derived threshold, and the
//! Horvitz-Thompson estimate of a few subset sums.
//!
//! cargo run --example threshold_sampling

use subset_sketch::{
    draw_ranks, expected_sample_count, threshold_for_budget, Population, SeedSpec, ThresholdSketch,
};

fn main() -> subset_sketch::Result<()> {
    let population = Population::from_weights(&[1.0, 2.0, 3.0, 4.0, 10.0, 0.5, 0.25, 6.0])?;
    let k = 3;
    let tau = threshold_for_budget(&population, k)?;
    println!(
        "W = {}, tau = k / W = {tau:.4}, expected sample size = {}",
        population.total_weight(),
        expected_sample_count(&population, tau)?
    );

    let sketch = ThresholdSketch::build(&draw_ranks(&population, SeedSpec(42)), tau)?;
    for e in sketch.entries() {
        println!("  item {:>2}  w = {:>5}  p = {:.3}  w/p = {:.3}", e.index, e.weight, e.p, e.estimate());
    }
    println!("total estimate    = {:.3}", sketch.ht_estimate(|_| true));
    println!("even-index sum    ~ {:.3}", sketch.ht_estimate(|i| i % 2 == 0));

    // Averaging many independent sketches recovers the true sum.
    let runs = 20_000;
    let mean: f64 = (0..runs)
        .map(|s| {
            ThresholdSketch::build(&draw_ranks(&population, SeedSpec(s)), tau)
                .map(|sk| sk.ht_estimate(|i| i % 2 == 0))
        })
        .sum::<subset_sketch::Result<f64>>()?
        / runs as f64;
    println!("mean over {runs} sketches = {mean:.3} (true 14.25)");
    Ok(())
}
