//! Seeded Monte Carlo harness for priority sampling.
//!
//! Trial `t` draws its uniforms from `SeedSpec(base_seed).derive(t)`. Trials are
//! grouped into fixed blocks that run in parallel; block accumulators are then
//! merged with a fixed-shape tree, so a report is bit-identical for a given
//! population and plan regardless of the thread schedule.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{tree_reduce, Estimate, PowerSums};
use crate::error::{Error, Result};
use crate::item::{rank_of, Population};
use crate::rng::SeedSpec;

const BLOCK: u64 = 2048;
/// Populations up to this size track every pair of items.
pub const FULL_PAIR_LIMIT: usize = 64;
const SAMPLED_PAIRS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub base_seed: u64,
    pub k: usize,
}

impl TrialPlan {
    pub fn new(trials: u64, base_seed: u64, k: usize) -> Self {
        TrialPlan {
            trials,
            base_seed,
            k,
        }
    }

    pub fn trial_seed(&self, trial: u64) -> SeedSpec {
        SeedSpec(self.base_seed).derive(trial)
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::Config(format!(
                "at least 2 trials required, got {}",
                self.trials
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidK { k: 0, min: 1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemMoments {
    pub index: u64,
    pub weight: f64,
    /// Empirical `E[w_hat_i]`.
    pub mean: Estimate,
    /// Empirical `Var[w_hat_i]`.
    pub variance: Estimate,
    /// Empirical `E[1 / tau_i]`; absent when fewer than `k` other items exist.
    pub inv_tau_excluding: Option<Estimate>,
    /// Mean of `Var[w_hat_i | tau_i] = w_i max(0, 1/tau_i - w_i)`. Unbiased
    /// for `Var[w_hat_i]` and observed on every draw, sampled or not.
    pub conditional_variance: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMoment {
    pub first: u64,
    pub second: u64,
    /// `w_i * w_j`
    pub target: f64,
    /// Empirical `E[w_hat_i * w_hat_j]`.
    pub product_mean: Estimate,
    /// Mean of `E[(w_hat_i w_hat_j)^2 | tau_ij] = w_i w_j max(w_i, 1/tau_ij)
    /// max(w_j, 1/tau_ij)`, where `tau_ij` is the `(k-1)`-st smallest rank
    /// among the other items. Requires `k >= 2`.
    pub conditional_second_moment: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub trials: u64,
    pub k: usize,
    pub n: usize,
    pub total_weight: f64,
    pub per_item: Vec<ItemMoments>,
    pub pairs: Vec<PairMoment>,
    pub total_mean: Estimate,
    pub total_variance: Estimate,
    /// Moments of `1 / tau` over draws with finite `tau`.
    pub inv_tau_mean: Option<Estimate>,
    pub inv_tau_sq_mean: Option<Estimate>,
    pub inv_tau_variance: Option<Estimate>,
}

/// Outcome of one priority-sampling draw, indexed by population position.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub tau: f64,
    /// Estimator weight per position; zero for unsampled items.
    pub estimates: Vec<f64>,
    pub sampled: Vec<bool>,
    /// `tau_i` per position; empty when `n - 1 < k`.
    pub tau_excluding: Vec<f64>,
}

/// Reusable per-thread buffers for [`draw_into`].
pub(crate) struct Scratch {
    keys: Vec<(f64, u64, usize)>,
    in_head: Vec<bool>,
    /// 1-based position among the `k + 1` smallest keys; 0 outside them.
    order: Vec<usize>,
    draw: Draw,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            keys: Vec::with_capacity(n),
            in_head: vec![false; n],
            order: vec![0; n],
            draw: Draw {
                tau: f64::INFINITY,
                estimates: vec![0.0; n],
                sampled: vec![false; n],
                tau_excluding: Vec::with_capacity(n),
            },
        }
    }
}

/// One priority-sampling draw without building a sketch. Uses the same rank
/// keys and tie rule as [`crate::PrioritySketch::build`]; `tau_i` comes from
/// the `k`-th and `(k+1)`-st order statistics instead of a per-item scan.
pub fn draw_once(population: &Population, k: usize, seed: SeedSpec) -> Draw {
    let mut scratch = Scratch::new(population.len());
    draw_into(population, k, seed, &mut scratch);
    scratch.draw
}

pub(crate) fn draw_into(population: &Population, k: usize, seed: SeedSpec, scratch: &mut Scratch) {
    let items = population.items();
    let n = items.len();
    let keys = &mut scratch.keys;
    keys.clear();
    keys.extend(
        items
            .iter()
            .enumerate()
            .map(|(pos, it)| (rank_of(seed.uniform(it.index), it.weight), it.index, pos)),
    );
    let cmp = |a: &(f64, u64, usize), b: &(f64, u64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));

    let draw = &mut scratch.draw;
    draw.sampled.iter_mut().for_each(|s| *s = false);
    draw.estimates.iter_mut().for_each(|e| *e = 0.0);
    draw.tau_excluding.clear();
    scratch.in_head.iter_mut().for_each(|h| *h = false);
    scratch.order.iter_mut().for_each(|o| *o = 0);

    let taken = k.min(n);
    let (tau, kth) = if n > k {
        let (head, pivot, _) = keys.select_nth_unstable_by(k, cmp);
        let kth = head.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
        (pivot.0, kth)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    draw.tau = tau;
    let inv_tau = 1.0 / tau;
    for &(rank, _, pos) in &keys[..taken] {
        scratch.in_head[pos] = true;
        if rank.is_finite() {
            draw.sampled[pos] = true;
            draw.estimates[pos] = items[pos].weight.max(inv_tau);
        }
    }
    if n > k {
        // Zero-weight items in the head are not sampled but still see tau.
        let in_head = &scratch.in_head;
        draw.tau_excluding
            .extend(in_head.iter().map(|&h| if h { tau } else { kth }));
        keys[..k].sort_unstable_by(cmp);
        for (o, &(_, _, pos)) in keys[..=k].iter().enumerate() {
            scratch.order[pos] = o + 1;
        }
    }
}

impl Scratch {
    /// `(k-1)`-st smallest rank among items other than positions `i` and `j`,
    /// for the draw last written by [`draw_into`] with `n > k >= 2`.
    fn tau_pair(&self, i: usize, j: usize, k: usize) -> f64 {
        let hidden = |limit: usize| {
            [self.order[i], self.order[j]]
                .iter()
                .filter(|&&o| o != 0 && o <= limit)
                .count()
        };
        let mut at = k - 1;
        loop {
            let next = k - 1 + hidden(at);
            if next == at {
                break;
            }
            at = next;
        }
        self.keys[at - 1].0
    }
}

struct BlockAcc {
    items: Vec<PowerSums>,
    inv_tau_items: Vec<PowerSums>,
    cond_var_items: Vec<PowerSums>,
    pairs: Vec<PowerSums>,
    pair_cond: Vec<PowerSums>,
    total: PowerSums,
    inv_tau: PowerSums,
}

impl BlockAcc {
    fn merge(&mut self, o: &BlockAcc) {
        for (a, b) in self.items.iter_mut().zip(&o.items) {
            a.merge(b);
        }
        for (a, b) in self.inv_tau_items.iter_mut().zip(&o.inv_tau_items) {
            a.merge(b);
        }
        for (a, b) in self.cond_var_items.iter_mut().zip(&o.cond_var_items) {
            a.merge(b);
        }
        for (a, b) in self.pairs.iter_mut().zip(&o.pairs) {
            a.merge(b);
        }
        for (a, b) in self.pair_cond.iter_mut().zip(&o.pair_cond) {
            a.merge(b);
        }
        self.total.merge(&o.total);
        self.inv_tau.merge(&o.inv_tau);
    }
}

/// Pairs of population positions whose product moments are tracked: all pairs
/// for small populations, otherwise a seeded subset.
pub fn tracked_pairs(n: usize, base_seed: u64) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n <= FULL_PAIR_LIMIT {
        return (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
    }
    let total = n * (n - 1) / 2;
    let want = SAMPLED_PAIRS.min(total);
    let stream = SeedSpec(base_seed).derive(u64::MAX);
    let mut chosen = BTreeSet::new();
    let mut counter = 0u64;
    while chosen.len() < want {
        let a = (stream.word(counter) % n as u64) as usize;
        let b = (stream.word(counter + 1) % n as u64) as usize;
        counter += 2;
        if a != b {
            chosen.insert((a.min(b), a.max(b)));
        }
    }
    chosen.into_iter().collect()
}

/// Runs `plan.trials` priority-sampling draws and accumulates the empirical
/// moments of the estimator weights, their pairwise products, the total
/// estimate and the inverse thresholds.
pub fn monte_carlo_moments(population: &Population, plan: &TrialPlan) -> Result<MomentReport> {
    plan.validate()?;
    let n = population.len();
    let k = plan.k;
    let w_total = population.total_weight();
    let weights: Vec<f64> = population.weights().collect();
    let pairs = tracked_pairs(n, plan.base_seed);
    let has_tau_i = n > k;
    let has_tau_pair = has_tau_i && k >= 2;
    // shifts only condition the sums; any constant near the mean works
    let inv_tau_shift = w_total / k as f64;
    let inv_tau_i_shift = |w: f64| {
        if k >= 2 {
            (w_total - w) / (k - 1) as f64
        } else {
            inv_tau_shift
        }
    };

    let blocks = plan.trials.div_ceil(BLOCK);
    let accs: Vec<BlockAcc> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(plan.trials);
            let mut acc = BlockAcc {
                items: weights.iter().map(|&w| PowerSums::new(w)).collect(),
                inv_tau_items: weights.iter().map(|&w| PowerSums::new(inv_tau_i_shift(w))).collect(),
                cond_var_items: weights
                    .iter()
                    .map(|&w| PowerSums::new(w * (inv_tau_i_shift(w) - w).max(0.0)))
                    .collect(),
                pairs: pairs
                    .iter()
                    .map(|&(i, j)| PowerSums::new(weights[i] * weights[j]))
                    .collect(),
                pair_cond: pairs
                    .iter()
                    .map(|&(i, j)| {
                        let inv = if k >= 2 { (w_total - weights[i] - weights[j]) / (k - 1) as f64 } else { 0.0 };
                        PowerSums::new(weights[i] * weights[j] * weights[i].max(inv) * weights[j].max(inv))
                    })
                    .collect(),
                total: PowerSums::new(w_total),
                inv_tau: PowerSums::new(inv_tau_shift),
            };
            let mut pair_sum = vec![0.0f64; pairs.len()];
            let mut pair_sq = vec![0.0f64; pairs.len()];
            let mut scratch = Scratch::new(n);
            for t in start..end {
                draw_into(population, k, plan.trial_seed(t), &mut scratch);
                let draw = &scratch.draw;
                for (acc_i, &e) in acc.items.iter_mut().zip(&draw.estimates) {
                    acc_i.push(e);
                }
                let total = crate::item::compensated_sum(draw.estimates.iter().copied());
                acc.total.push(total);
                if draw.tau.is_finite() {
                    acc.inv_tau.push(1.0 / draw.tau);
                }
                for (pos, &ti) in draw.tau_excluding.iter().enumerate() {
                    let (inv, w) = (1.0 / ti, weights[pos]);
                    acc.inv_tau_items[pos].push(inv);
                    acc.cond_var_items[pos].push(w * (inv - w).max(0.0));
                }
                if has_tau_pair {
                    for (slot, &(i, j)) in pairs.iter().enumerate() {
                        let inv = 1.0 / scratch.tau_pair(i, j, k);
                        let (wi, wj) = (weights[i], weights[j]);
                        acc.pair_cond[slot].push(wi * wj * wi.max(inv) * wj.max(inv));
                    }
                }
                for (slot, &(i, j)) in pairs.iter().enumerate() {
                    let x = draw.estimates[i] * draw.estimates[j];
                    if x != 0.0 {
                        pair_sum[slot] += x;
                        pair_sq[slot] += x * x;
                    }
                }
            }
            for (slot, p) in acc.pairs.iter_mut().enumerate() {
                p.push_raw2(end - start, pair_sum[slot], pair_sq[slot]);
            }
            acc
        })
        .collect();
    let acc = tree_reduce(accs, BlockAcc::merge).expect("at least one block");

    let per_item = population
        .items()
        .iter()
        .enumerate()
        .map(|(pos, it)| ItemMoments {
            index: it.index,
            weight: it.weight,
            mean: acc.items[pos].mean(),
            variance: acc.items[pos].variance(),
            inv_tau_excluding: has_tau_i.then(|| acc.inv_tau_items[pos].mean()),
            conditional_variance: has_tau_i.then(|| acc.cond_var_items[pos].mean()),
        })
        .collect();
    let pair_moments = pairs
        .iter()
        .zip(acc.pairs.iter().zip(&acc.pair_cond))
        .map(|(&(i, j), (ps, cond))| PairMoment {
            first: population.items()[i].index,
            second: population.items()[j].index,
            target: weights[i] * weights[j],
            product_mean: ps.mean(),
            conditional_second_moment: has_tau_pair.then(|| cond.mean()),
        })
        .collect();
    let tau_seen = acc.inv_tau.count() >= 2;
    Ok(MomentReport {
        trials: plan.trials,
        k,
        n,
        total_weight: w_total,
        per_item,
        pairs: pair_moments,
        total_mean: acc.total.mean(),
        total_variance: acc.total.variance(),
        inv_tau_mean: tau_seen.then(|| acc.inv_tau.mean()),
        inv_tau_sq_mean: tau_seen.then(|| acc.inv_tau.mean_of_squares()),
        inv_tau_variance: tau_seen.then(|| acc.inv_tau.variance()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::draw_ranks;
    use crate::priority::{tau_excluding, PrioritySketch};

    #[test]
    fn draw_matches_sketch_and_direct_tau_i() {
        let pop = Population::from_weights(&[4.0, 0.0, 3.0, 2.0, 1.0, 0.5, 2.0]).unwrap();
        for k in 1..=7 {
            for s in 0..200 {
                let seed = SeedSpec(s);
                let draw = draw_once(&pop, k, seed);
                let ranked = draw_ranks(&pop, seed);
                let sketch = PrioritySketch::build(&ranked, k).unwrap();
                assert_eq!(draw.tau, sketch.tau());
                for (pos, it) in pop.items().iter().enumerate() {
                    assert_eq!(draw.sampled[pos], sketch.contains(it.index));
                    assert_eq!(draw.estimates[pos], sketch.estimate_of(it.index));
                    if pop.len() > k {
                        let direct = tau_excluding(&ranked, k, it.index).unwrap().value;
                        assert_eq!(draw.tau_excluding[pos], direct, "k={k} seed={s} pos={pos}");
                    }
                }
            }
        }
    }

    #[test]
    fn tau_pair_matches_direct_order_statistic() {
        let pop = Population::from_weights(&[4.0, 0.0, 3.0, 2.0, 1.0, 0.5, 2.0, 6.0]).unwrap();
        let n = pop.len();
        for k in 2..n {
            let mut scratch = Scratch::new(n);
            for s in 0..100 {
                let seed = SeedSpec(s);
                draw_into(&pop, k, seed, &mut scratch);
                let ranked = draw_ranks(&pop, seed);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let mut others: Vec<f64> = (0..n)
                            .filter(|&p| p != i && p != j)
                            .map(|p| ranked[p].rank)
                            .collect();
                        others.sort_by(f64::total_cmp);
                        assert_eq!(scratch.tau_pair(i, j, k), others[k - 2], "k={k} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn conditional_moments_track_the_empirical_ones() {
        let pop = Population::from_weights(&[4.0, 3.0, 2.0, 1.0, 0.5]).unwrap();
        let r = monte_carlo_moments(&pop, &TrialPlan::new(200_000, 8, 3)).unwrap();
        for item in &r.per_item {
            let cv = item.conditional_variance.unwrap();
            assert!((cv.value - item.variance.value).abs() < 4.0 * item.variance.se.hypot(cv.se));
        }
        for p in &r.pairs {
            let m2 = p.conditional_second_moment.unwrap().value;
            assert!(m2 >= p.target * p.target);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let pop = Population::from_weights(&[4.0, 3.0, 2.0, 1.0]).unwrap();
        let plan = TrialPlan::new(10_000, 99, 2);
        let a = monte_carlo_moments(&pop, &plan).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_moments(&pop, &plan).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.pairs.len(), 6);
    }

    #[test]
    fn exhaustive_sample_has_zero_variance() {
        let pop = Population::from_weights(&[4.0, 3.0, 2.0]).unwrap();
        let r = monte_carlo_moments(&pop, &TrialPlan::new(1000, 1, 3)).unwrap();
        assert_eq!(r.total_variance.value, 0.0);
        assert_eq!(r.total_mean.value, 9.0);
        assert!(r.inv_tau_mean.is_none());
        for item in &r.per_item {
            assert_eq!(item.variance.value, 0.0);
            assert_eq!(item.mean.value, item.weight);
            assert!(item.inv_tau_excluding.is_none());
        }
    }

    #[test]
    fn plan_validation() {
        let pop = Population::from_weights(&[1.0, 2.0]).unwrap();
        assert!(monte_carlo_moments(&pop, &TrialPlan::new(1, 0, 1)).is_err());
        assert!(monte_carlo_moments(&pop, &TrialPlan::new(10, 0, 0)).is_err());
    }

    #[test]
    fn sampled_pairs_for_large_populations() {
        let pairs = tracked_pairs(200, 5);
        assert_eq!(pairs.len(), SAMPLED_PAIRS);
        assert!(pairs.iter().all(|&(i, j)| i < j && j < 200));
        assert_eq!(pairs, tracked_pairs(200, 5));
        assert_eq!(tracked_pairs(4, 0).len(), 6);
    }

    #[test]
    fn two_items_k_one_matches_closed_form() {
        // Weights (1, 1), k = 1: the sampled item gets 1 / max(u1, u2), so
        // E[w_hat_1] = E[1/max * 1{u1 < u2}] = integral_0^1 (1/y) * y dy = 1,
        // and E[w_hat_1^2] = integral_0^1 (1/y^2) * y dy diverges. The mean
        // converges, so only the mean is checked here.
        let pop = Population::from_weights(&[1.0, 1.0]).unwrap();
        let r = monte_carlo_moments(&pop, &TrialPlan::new(200_000, 3, 1)).unwrap();
        for item in &r.per_item {
            assert!((item.mean.value - 1.0).abs() < 0.05, "{:?}", item.mean);
        }
        // tau = max(u1, u2) has density 2y: E[1/tau] = integral_0^1 2 dy = 2,
        // again with an infinite second moment.
        let m = r.inv_tau_mean.unwrap();
        assert!((m.value - 2.0).abs() < 0.1, "{m:?}");
    }
}
