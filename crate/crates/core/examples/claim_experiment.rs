//! Monte Carlo check of the estimator's statistical guarantees on geometric
//! weights: unbiasedness, zero covariance, and the variance and threshold
//! bounds, each at a four-standard-error tolerance.
//!
//! cargo run --release --example claim_experiment

use subset_sketch::analysis::{check_claims, Claim, TrialPlan};
use subset_sketch::Population;

fn main() -> subset_sketch::Result<()> {
    let weights: Vec<f64> = (0..32).map(|i| 0.5f64.powi(i)).collect();
    let population = Population::from_weights(&weights)?;
    let report = check_claims(&population, &TrialPlan::new(200_000, 1, 8))?;

    println!("n = {}, k = {}, trials = {}", report.n, report.k, report.trials);
    println!(
        "bounds: basic {:.4}, tight {:.4}, threshold {:.4}",
        report.bounds.basic_bound, report.bounds.tight_bound, report.bounds.threshold_bound
    );
    for claim in Claim::ALL {
        let checks: Vec<_> = report.checks_for(claim).collect();
        let worst = checks
            .iter()
            .map(|c| c.margin_se)
            .fold(f64::INFINITY, f64::min);
        let failed = checks.iter().filter(|c| !c.passed()).count();
        println!(
            "{:<32} {:>4} checks, {failed} failed, worst margin {worst:+.2} SE",
            claim.key(),
            checks.len()
        );
    }
    println!("all pass: {}", report.all_pass());
    Ok(())
}
