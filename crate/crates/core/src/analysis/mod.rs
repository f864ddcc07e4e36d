//! Variance bounds, uniform-case inverse-threshold moments and the Monte Carlo
//! harness that checks priority sampling's statistical guarantees.

mod bounds;
mod claims;
mod montecarlo;
mod stats;

pub use bounds::{
    uniform_tau_moments, variance_bound_basic, variance_bound_tight, BoundReport, UniformTauMoments,
};
pub use claims::{
    check_claims, check_claims_feasible, Claim, ClaimCheck, ClaimReport, Relation, Verdict,
    TOLERANCE_SE,
};
pub use montecarlo::{
    draw_once, monte_carlo_moments, tracked_pairs, Draw, ItemMoments, MomentReport, PairMoment,
    TrialPlan, FULL_PAIR_LIMIT,
};
pub use stats::Estimate;
