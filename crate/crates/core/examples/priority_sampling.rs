//! Priority sampling: keep the k items with the smallest rank `u / w` and
//! weight each by `max(w, 1 / tau)`.
//!
//! cargo run --example priority_sampling

use subset_sketch::{draw_ranks, Population, PrioritySketch, SeedSpec};

fn main() -> subset_sketch::Result<()> {
    let population = Population::from_weights(&[4.0, 3.0, 2.0, 1.0])?;
    let sketch = PrioritySketch::build(&draw_ranks(&population, SeedSpec(7)), 2)?;
    println!("tau = {:.4}", sketch.tau());
    for s in sketch.samples() {
        println!("  item {}  w = {}  rank = {:.4}  w_hat = {:.4}", s.index, s.weight, s.rank, s.estimate);
    }
    println!("sketch JSON: {}", sketch.to_json());

    // E[estimate of items {0, 1}] = 4 + 3
    let runs = 100_000u64;
    let mut sum = 0.0;
    for seed in 0..runs {
        let sk = PrioritySketch::build(&draw_ranks(&population, SeedSpec(seed)), 2)?;
        sum += sk.subset_estimate(|i| i <= 1);
    }
    println!("mean range[0,1] estimate over {runs} sketches = {:.4} (true 7)", sum / runs as f64);

    // With k >= n every item is kept at its own weight.
    let full = PrioritySketch::build(&draw_ranks(&population, SeedSpec(7)), 10)?;
    println!("k >= n: tau = {}, total = {}", full.tau(), full.total_estimate());
    Ok(())
}
