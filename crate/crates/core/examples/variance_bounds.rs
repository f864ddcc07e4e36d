//! Closed-form variance bounds for priority sampling against the threshold
//! sampling bound with the same expected budget.
//!
//! cargo run --example variance_bounds

use subset_sketch::analysis::{uniform_tau_moments, BoundReport};
use subset_sketch::Population;

fn main() -> subset_sketch::Result<()> {
    let geometric: Vec<f64> = (0..16).map(|i| 0.5f64.powi(i)).collect();
    let cases = [
        ("[4,3,2,1]", vec![4.0, 3.0, 2.0, 1.0]),
        ("uniform 32", vec![1.0; 32]),
        ("geometric 16", geometric),
    ];
    println!("{:<13} {:>3} {:>12} {:>12} {:>12}", "weights", "k", "W^2/(k-1)", "tight", "threshold");
    for (name, weights) in &cases {
        let population = Population::from_weights(weights)?;
        for k in [2, 3, 4, 8] {
            let b = BoundReport::compute(&population, k)?;
            println!(
                "{name:<13} {k:>3} {:>12.4} {:>12.4} {:>12.4}",
                b.basic_bound, b.tight_bound, b.threshold_bound
            );
        }
    }

    println!("\nuniform weights: moments of 1/tau");
    for (n, k) in [(10, 2), (100, 10), (1000, 100)] {
        let m = uniform_tau_moments(n, k)?;
        println!("  n = {n:>4}, k = {k:>3}: E = {}, Var = {:?}", m.mean_inv_tau, m.var_inv_tau);
    }
    Ok(())
}
