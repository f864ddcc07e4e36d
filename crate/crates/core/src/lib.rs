//! Weighted sampling sketches for unbiased subset-sum estimation.
//!
//! - [`threshold`]: threshold (Poisson) sampling with a fixed threshold and the
//!   Horvitz-Thompson estimator.
//! - [`priority`]: priority sampling, which keeps exactly `k` items, with batch
//!   and streaming builders.
//! - [`analysis`]: closed-form variance bounds and a deterministic, parallel
//!   Monte Carlo harness that checks the estimators' statistical guarantees.
//! - [`distinct`]: a k-minimum-values distinct-count sketch.
//! - [`cli`]: the command-line front end used by the `subset-sketch` binary.

pub mod analysis;
pub mod cli;
pub mod distinct;
pub mod error;
pub mod ingest;
pub mod item;
pub mod priority;
pub mod rng;
pub mod threshold;

pub use error::{Error, Result};
pub use item::{draw_ranks, total_weight, Population, RankedItem, WeightedItem};
pub use priority::{build_priority_streaming, tau_excluding, PrioritySketch, PriorityStream, TauExcluding};
pub use rng::SeedSpec;
pub use threshold::{
    expected_sample_count, threshold_for_budget, threshold_variance_bound, ThresholdSketch,
};
