//! One-pass priority sampling over a long stream with O(k) memory. The
//! streaming sketch is identical to the batch sketch for the same seed.
//!
//! cargo run --release --example streaming_priority

use subset_sketch::{draw_ranks, Population, PrioritySketch, PriorityStream, SeedSpec, WeightedItem};

fn main() -> subset_sketch::Result<()> {
    let n = 1_000_000u64;
    let k = 100;
    let seed = SeedSpec(2024);
    // heavy-tailed weights: a few flows carry most of the traffic
    let weight = |i: u64| 1.0 / ((i % 10_000) + 1) as f64;

    let mut stream = PriorityStream::new(k, seed)?;
    for i in 0..n {
        stream.push(WeightedItem::new(i, weight(i))?)?;
    }
    println!("seen {} items, retained at most {}", stream.seen(), stream.peak_retained());
    let sketch = stream.finish();

    let exact: f64 = (0..n).map(weight).sum();
    let heavy_exact: f64 = (0..n).filter(|i| i % 10_000 < 10).map(weight).sum();
    println!("total:  estimate {:.1}, exact {exact:.1}", sketch.total_estimate());
    println!(
        "heavy:  estimate {:.1}, exact {heavy_exact:.1}",
        sketch.subset_estimate(|i| i % 10_000 < 10)
    );

    let small: Vec<f64> = (0..5_000).map(weight).collect();
    let pop = Population::from_weights(&small)?;
    let batch = PrioritySketch::build(&draw_ranks(&pop, seed), k)?;
    let streamed = subset_sketch::build_priority_streaming(pop.items().iter().copied(), k, seed)?;
    println!("batch == streaming on 5000 items: {}", batch == streamed);
    Ok(())
}
