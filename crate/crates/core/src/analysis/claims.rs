//! Statistical claim checks built on [`monte_carlo_moments`].
//!
//! Every check compares an empirical quantity against an analytic target at a
//! fixed tolerance of four standard errors. `margin_se` is the signed headroom
//! in standard errors (`(bound - empirical) / se` for upper bounds, minus the
//! absolute deviation for equalities); a check passes iff `margin_se >= -4`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bounds::BoundReport;
use super::montecarlo::{monte_carlo_moments, MomentReport, TrialPlan};
use crate::error::{Error, Result};
use crate::item::Population;

/// Tolerance, in standard errors, applied to every comparison.
pub const TOLERANCE_SE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `E[w_hat_i] = w_i`
    Fact1Mean,
    /// `E[w_hat_i w_hat_j] = w_i w_j` for `i != j`
    Fact1PairProduct,
    /// `E[W_hat] = W`
    Fact1TotalMean,
    /// `Var[W_hat] <= W^2 / (k - 1)`
    Theorem1TotalVariance,
    /// `Var[w_hat_i] <= w_i E[1/tau_i]`
    Claim1ItemVariance,
    /// `E[1/tau] <= W / k`
    Claim2MeanInvTau,
    /// `E[1/tau_i] <= W / (k - 1)`
    Claim3MeanInvTauExcluding,
    /// `Var[W_hat] <= (W^2 - sum w^2) / (k - 1) - sum_{i >= k} w_(i)^2`
    Claim4TightBound,
    /// `Var[w_hat_i] <= w_i E[1/tau_i] - w_i^2` for sorted positions `i > k`
    Claim6ItemVariance,
    /// `E[1/tau_i] <= (W - w_i) / (k - 1)`
    Claim7MeanInvTauExcluding,
}

impl Claim {
    pub const ALL: [Claim; 10] = [
        Claim::Fact1Mean,
        Claim::Fact1PairProduct,
        Claim::Fact1TotalMean,
        Claim::Theorem1TotalVariance,
        Claim::Claim1ItemVariance,
        Claim::Claim2MeanInvTau,
        Claim::Claim3MeanInvTauExcluding,
        Claim::Claim4TightBound,
        Claim::Claim6ItemVariance,
        Claim::Claim7MeanInvTauExcluding,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Claim::Fact1Mean => "fact1_mean",
            Claim::Fact1PairProduct => "fact1_pair_product",
            Claim::Fact1TotalMean => "fact1_total_mean",
            Claim::Theorem1TotalVariance => "theorem1_total_variance",
            Claim::Claim1ItemVariance => "claim1_item_variance",
            Claim::Claim2MeanInvTau => "claim2_mean_inv_tau",
            Claim::Claim3MeanInvTauExcluding => "claim3_mean_inv_tau_excluding",
            Claim::Claim4TightBound => "claim4_tight_bound",
            Claim::Claim6ItemVariance => "claim6_item_variance",
            Claim::Claim7MeanInvTauExcluding => "claim7_mean_inv_tau_excluding",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown claim '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// empirical equals the target
    Eq,
    /// empirical is at most the bound
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: Claim,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub item: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<(u64, u64)>,
    pub relation: Relation,
    pub empirical: f64,
    pub bound: f64,
    pub se: f64,
    pub margin_se: f64,
    pub verdict: Verdict,
}

impl ClaimCheck {
    fn new(claim: Claim, relation: Relation, empirical: f64, bound: f64, se: f64) -> Self {
        let diff = empirical - bound;
        let ratio = |d: f64| {
            if d == 0.0 {
                0.0
            } else {
                d / se
            }
        };
        let margin_se = match relation {
            Relation::Le => ratio(-diff),
            Relation::Eq => -ratio(diff.abs()),
        };
        // NaN margins (undefined SE) fail
        let verdict = if margin_se >= -TOLERANCE_SE {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ClaimCheck {
            claim,
            item: None,
            pair: None,
            relation,
            empirical,
            bound,
            se,
            margin_se,
            verdict,
        }
    }

    fn for_item(mut self, index: u64) -> Self {
        self.item = Some(index);
        self
    }

    fn for_pair(mut self, pair: (u64, u64)) -> Self {
        self.pair = Some(pair);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub base_seed: u64,
    pub total_weight: f64,
    pub bounds: BoundReport,
    pub checks: Vec<ClaimCheck>,
    pub failed: usize,
}

impl ClaimReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn checks_for(&self, claim: Claim) -> impl Iterator<Item = &ClaimCheck> {
        self.checks.iter().filter(move |c| c.claim == claim)
    }

    /// Keeps only the checks for `claims`.
    pub fn retain(&mut self, claims: &[Claim]) {
        self.checks.retain(|c| claims.contains(&c.claim));
        self.failed = self.checks.iter().filter(|c| !c.passed()).count();
    }
}

/// Verifies the precondition of [`check_claims`] without running any trials.
pub fn check_claims_feasible(population: &Population, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::BoundUndefined { k });
    }
    let n = population.len();
    if n < k + 1 {
        return Err(Error::TauUndefined { others: n.saturating_sub(1), k });
    }
    Ok(())
}

/// Runs the Monte Carlo harness and checks every claim against its bound.
pub fn check_claims(population: &Population, plan: &TrialPlan) -> Result<ClaimReport> {
    check_claims_feasible(population, plan.k)?;
    let moments = monte_carlo_moments(population, plan)?;
    let bounds = BoundReport::compute(population, plan.k)?;
    let checks = evaluate(&moments, &bounds);
    let failed = checks.iter().filter(|c| !c.passed()).count();
    Ok(ClaimReport {
        n: population.len(),
        k: plan.k,
        trials: plan.trials,
        base_seed: plan.base_seed,
        total_weight: population.total_weight(),
        bounds,
        checks,
        failed,
    })
}

fn evaluate(m: &MomentReport, bounds: &BoundReport) -> Vec<ClaimCheck> {
    let k = m.k;
    let km1 = (k - 1) as f64;
    let w_total = m.total_weight;
    let mut out = Vec::new();

    // Rarely sampled items can show no spread at all in the trials; their
    // mean checks fall back on the variance implied by the conditional form.
    let trials = m.trials as f64;
    let floored = |se: f64, model_var: Option<f64>| {
        model_var.map_or(se, |v| se.max((v.max(0.0) / (trials - 1.0)).sqrt()))
    };
    for item in &m.per_item {
        let se = floored(item.mean.se, item.conditional_variance.map(|v| v.value));
        out.push(
            ClaimCheck::new(Claim::Fact1Mean, Relation::Eq, item.mean.value, item.weight, se)
                .for_item(item.index),
        );
    }
    for p in &m.pairs {
        let model_var = p
            .conditional_second_moment
            .map(|m2| m2.value - p.target * p.target);
        out.push(
            ClaimCheck::new(
                Claim::Fact1PairProduct,
                Relation::Eq,
                p.product_mean.value,
                p.target,
                floored(p.product_mean.se, model_var),
            )
            .for_pair((p.first, p.second)),
        );
    }
    out.push(ClaimCheck::new(
        Claim::Fact1TotalMean,
        Relation::Eq,
        m.total_mean.value,
        w_total,
        m.total_mean.se,
    ));
    out.push(ClaimCheck::new(
        Claim::Theorem1TotalVariance,
        Relation::Le,
        m.total_variance.value,
        bounds.basic_bound,
        m.total_variance.se,
    ));
    out.push(ClaimCheck::new(
        Claim::Claim4TightBound,
        Relation::Le,
        m.total_variance.value,
        bounds.tight_bound,
        m.total_variance.se,
    ));
    if let Some(inv) = m.inv_tau_mean {
        out.push(ClaimCheck::new(
            Claim::Claim2MeanInvTau,
            Relation::Le,
            inv.value,
            w_total / k as f64,
            inv.se,
        ));
    }

    // sorted position (1-based) of each item, heaviest first, ties by index
    let mut order: Vec<usize> = (0..m.per_item.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&m.per_item[a], &m.per_item[b]);
        y.weight.total_cmp(&x.weight).then(x.index.cmp(&y.index))
    });
    let mut position = vec![0usize; order.len()];
    for (rank, &pos) in order.iter().enumerate() {
        position[pos] = rank + 1;
    }

    for (pos, item) in m.per_item.iter().enumerate() {
        let Some(inv_i) = item.inv_tau_excluding else {
            continue;
        };
        let w = item.weight;
        out.push(
            ClaimCheck::new(
                Claim::Claim3MeanInvTauExcluding,
                Relation::Le,
                inv_i.value,
                w_total / km1,
                inv_i.se,
            )
            .for_item(item.index),
        );
        out.push(
            ClaimCheck::new(
                Claim::Claim7MeanInvTauExcluding,
                Relation::Le,
                inv_i.value,
                (w_total - w) / km1,
                inv_i.se,
            )
            .for_item(item.index),
        );
        // the bound is itself estimated; combining both SEs ignores their
        // positive correlation and so overstates the SE of the difference
        let se = item.variance.se.hypot(w * inv_i.se);
        out.push(
            ClaimCheck::new(
                Claim::Claim1ItemVariance,
                Relation::Le,
                item.variance.value,
                w * inv_i.value,
                se,
            )
            .for_item(item.index),
        );
        // w_i <= 1/tau_i holds on every draw only for sorted positions beyond k;
        // at position k it fails whenever w_(k) > w_(k+1)
        if position[pos] > k {
            out.push(
                ClaimCheck::new(
                    Claim::Claim6ItemVariance,
                    Relation::Le,
                    item.variance.value,
                    w * inv_i.value - w * w,
                    se,
                )
                .for_item(item.index),
            );
        }
    }
    out
}
