//! Reading weights from CSV and JSON-lines input, then sketching them.
//!
//! cargo run --example ingest_weights

use std::io::Cursor;

use subset_sketch::ingest::{read_population, WeightFormat};
use subset_sketch::{draw_ranks, PrioritySketch, SeedSpec};

fn main() -> subset_sketch::Result<()> {
    let plain = "4\n3\n\n2\n1\n";
    let indexed = "index,weight\n100,4.5\n205,0.5\n310,2\n";
    let jsonl = "{\"index\":7,\"weight\":1.5}\n{\"index\":9,\"weight\":3}\n";

    for (label, text, format) in [
        ("plain csv", plain, WeightFormat::Csv),
        ("indexed csv", indexed, WeightFormat::Csv),
        ("jsonl", jsonl, WeightFormat::Jsonl),
    ] {
        let population = read_population(Cursor::new(text), format)?;
        let sketch = PrioritySketch::build(&draw_ranks(&population, SeedSpec(1)), 2)?;
        let kept: Vec<u64> = sketch.samples().iter().map(|s| s.index).collect();
        println!(
            "{label:<12} n = {}, W = {}, kept {kept:?}, total estimate {:.3}",
            population.len(),
            population.total_weight(),
            sketch.total_estimate()
        );
    }

    match read_population(Cursor::new("1\n-2\n"), WeightFormat::Csv) {
        Err(e) => println!("bad input rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
