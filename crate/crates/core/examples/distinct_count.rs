//! Distinct counting with a k-minimum-values sketch, including a merge of two
//! overlapping streams.
//!
//! cargo run --example distinct_count

use subset_sketch::distinct::KmvSketch;

fn main() -> subset_sketch::Result<()> {
    let k = 256;
    let mut left = KmvSketch::new(k, 11)?;
    let mut right = KmvSketch::new(k, 11)?;
    for i in 0..60_000u32 {
        left.insert(format!("user-{i}").as_bytes());
    }
    for i in 40_000..100_000u32 {
        // every key twice: duplicates do not move the estimate
        right.insert(format!("user-{i}").as_bytes());
        right.insert(format!("user-{i}").as_bytes());
    }
    let union = left.merge(&right)?;
    let rel_sd = |d: f64| ((d - k as f64) / (d * (k as f64 - 1.0))).sqrt();
    println!("left  ~ {:.0} (true 60000)", left.estimate());
    println!("right ~ {:.0} (true 60000)", right.estimate());
    println!(
        "union ~ {:.0} (true 100000, relative sd {:.1}%)",
        union.estimate(),
        100.0 * rel_sd(100_000.0)
    );

    let mut small = KmvSketch::new(k, 11)?;
    for word in ["a", "b", "c", "a", "b"] {
        small.insert(word.as_bytes());
    }
    println!("small stream: estimate {}, exact mode {}", small.estimate(), small.exact_mode());
    println!("round trip ok: {}", KmvSketch::from_json(&small.to_json())? == small);
    Ok(())
}
