//! Priority sampling (sequential Poisson sampling).
//!
//! The `k` items of smallest rank `u_i / w_i` form the sample and the
//! `(k+1)`-st smallest rank is the threshold `tau`. A sampled item is weighted
//! by `w_i / min(1, w_i * tau)`, which equals `max(w_i, 1 / tau)`; every other
//! item contributes zero. The resulting per-item estimates are unbiased and
//! pairwise uncorrelated even though `tau` depends on all draws.
//!
//! Conventions:
//! - ties in rank are broken by smaller index;
//! - with `n <= k` every positive-weight item is kept, `tau = +inf` and each
//!   estimate equals its weight;
//! - zero-weight items have rank `+inf` and are never kept.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::{check_weight, rank_order, RankedItem, WeightedItem};
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrioritySample {
    pub index: u64,
    pub weight: f64,
    pub rank: f64,
    /// Estimator weight `max(w, 1 / tau)`.
    #[serde(rename = "what")]
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrioritySketch {
    k: usize,
    tau: f64,
    samples: Vec<PrioritySample>,
}

#[inline]
fn estimator_weight(weight: f64, tau: f64) -> f64 {
    weight.max(1.0 / tau)
}

impl PrioritySketch {
    /// Batch construction from a full set of ranked items.
    pub fn build(ranked: &[RankedItem], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK { k, min: 1 });
        }
        let mut items = ranked.to_vec();
        if items.len() > k + 1 {
            items.select_nth_unstable_by(k, rank_order);
            items.truncate(k + 1);
        }
        items.sort_unstable_by(rank_order);
        Ok(Self::from_smallest(k, items))
    }

    /// `smallest` holds the `min(n, k+1)` smallest items in ascending order.
    fn from_smallest(k: usize, mut smallest: Vec<RankedItem>) -> Self {
        let tau = if smallest.len() > k {
            smallest.truncate(k + 1);
            smallest.pop().map_or(f64::INFINITY, |r| r.rank)
        } else {
            f64::INFINITY
        };
        let samples = smallest
            .into_iter()
            .filter(|r| r.rank.is_finite())
            .map(|r| PrioritySample {
                index: r.index,
                weight: r.weight,
                rank: r.rank,
                estimate: estimator_weight(r.weight, tau),
            })
            .collect();
        PrioritySketch { k, tau, samples }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `(k+1)`-st smallest rank, `+inf` when there are at most `k` items.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Samples in ascending `(rank, index)` order.
    pub fn samples(&self) -> &[PrioritySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.samples.iter().any(|s| s.index == index)
    }

    /// Estimator weight of `index`, zero when it was not sampled.
    pub fn estimate_of(&self, index: u64) -> f64 {
        self.samples
            .iter()
            .find(|s| s.index == index)
            .map_or(0.0, |s| s.estimate)
    }

    pub fn subset_estimate(&self, subset: impl Fn(u64) -> bool) -> f64 {
        crate::item::compensated_sum(
            self.samples
                .iter()
                .filter(|s| subset(s.index))
                .map(|s| s.estimate),
        )
    }

    /// Estimate of the total weight.
    pub fn total_estimate(&self) -> f64 {
        self.subset_estimate(|_| true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PriorityWire::from(self)).expect("sketch serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: PriorityWire =
            serde_json::from_str(s).map_err(|e| Error::InvalidSketch(e.to_string()))?;
        wire.try_into()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
    fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSketch(msg));
        if self.k == 0 {
            return invalid("k must be at least 1".into());
        }
        if !(self.tau > 0.0) {
            return invalid(format!("tau {} must be positive", self.tau));
        }
        if self.samples.len() > self.k {
            return invalid(format!(
                "{} samples exceed k = {}",
                self.samples.len(),
                self.k
            ));
        }
        if self.tau.is_finite() && self.samples.len() != self.k {
            return invalid(format!(
                "finite tau requires exactly k = {} samples, found {}",
                self.k,
                self.samples.len()
            ));
        }
        let mut seen = HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            check_weight(s.index, s.weight).map_err(|e| Error::InvalidSketch(e.to_string()))?;
            if s.weight == 0.0 {
                return invalid(format!("zero-weight item {} cannot be sampled", s.index));
            }
            if !seen.insert(s.index) {
                return invalid(format!("duplicate index {}", s.index));
            }
            if !(s.rank > 0.0 && s.rank.is_finite()) {
                return invalid(format!("rank of item {} must be positive and finite", s.index));
            }
            if s.rank > self.tau {
                return invalid(format!("rank of item {} exceeds tau", s.index));
            }
            if s.estimate != estimator_weight(s.weight, self.tau) {
                return invalid(format!(
                    "estimate of item {} is not max(w, 1/tau)",
                    s.index
                ));
            }
        }
        let ordered = self
            .samples
            .windows(2)
            .all(|w| (w[0].rank, w[0].index) < (w[1].rank, w[1].index));
        if !ordered {
            return invalid("samples are not ordered by (rank, index)".into());
        }
        Ok(())
    }
}

/// Single-pass builder keeping the `k+1` smallest `(rank, index)` keys in a
/// max-heap. Produces the same sketch as [`PrioritySketch::build`] on the same
/// items and seed. Item indices are assumed unique.
#[derive(Debug, Clone)]
pub struct PriorityStream {
    k: usize,
    seed: SeedSpec,
    heap: BinaryHeap<HeapEntry>,
    seen: u64,
    peak: usize,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry(RankedItem);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(&self.0, &other.0)
    }
}

impl PriorityStream {
    pub fn new(k: usize, seed: SeedSpec) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK { k, min: 1 });
        }
        Ok(PriorityStream {
            k,
            seed,
            heap: BinaryHeap::with_capacity(k + 2),
            seen: 0,
            peak: 0,
        })
    }

    pub fn push(&mut self, item: WeightedItem) -> Result<()> {
        check_weight(item.index, item.weight)?;
        self.seen += 1;
        let entry = HeapEntry(RankedItem::draw(item, self.seed));
        if self.heap.len() <= self.k {
            self.heap.push(entry);
        } else if let Some(mut root) = self.heap.peek_mut() {
            if entry < *root {
                *root = entry;
            }
        }
        self.peak = self.peak.max(self.heap.len());
        Ok(())
    }

    /// Number of items pushed so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Entries currently held (at most `k + 1`).
    pub fn retained(&self) -> usize {
        self.heap.len()
    }

    /// Largest number of entries ever held.
    pub fn peak_retained(&self) -> usize {
        self.peak
    }

    pub fn finish(self) -> PrioritySketch {
        let smallest: Vec<RankedItem> = self
            .heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| e.0)
            .collect();
        PrioritySketch::from_smallest(self.k, smallest)
    }
}

/// Streams `items` through a [`PriorityStream`].
pub fn build_priority_streaming(
    items: impl IntoIterator<Item = WeightedItem>,
    k: usize,
    seed: SeedSpec,
) -> Result<PrioritySketch> {
    let mut stream = PriorityStream::new(k, seed)?;
    for item in items {
        stream.push(item)?;
    }
    Ok(stream.finish())
}

/// The k-th smallest rank among all items except one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauExcluding {
    pub excluded_index: u64,
    pub value: f64,
}

/// Computes `tau_i` directly: the k-th smallest rank over items `j != excluded`.
///
/// Whenever `excluded` is in the priority sample, `tau_i` equals the sketch's
/// `tau`, and it never depends on the excluded item's own uniform.
pub fn tau_excluding(ranked: &[RankedItem], k: usize, excluded: u64) -> Result<TauExcluding> {
    if k == 0 {
        return Err(Error::InvalidK { k, min: 1 });
    }
    if !ranked.iter().any(|r| r.index == excluded) {
        return Err(Error::UnknownIndex { index: excluded });
    }
    let mut others: Vec<f64> = ranked
        .iter()
        .filter(|r| r.index != excluded)
        .map(|r| r.rank)
        .collect();
    if others.len() < k {
        return Err(Error::TauUndefined {
            others: others.len(),
            k,
        });
    }
    let (_, kth, _) = others.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(TauExcluding {
        excluded_index: excluded,
        value: *kth,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TauWire {
    Finite(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorityWire {
    method: String,
    k: usize,
    tau: TauWire,
    samples: Vec<PrioritySample>,
}

impl From<&PrioritySketch> for PriorityWire {
    fn from(s: &PrioritySketch) -> Self {
        PriorityWire {
            method: "priority".into(),
            k: s.k,
            tau: if s.tau.is_finite() {
                TauWire::Finite(s.tau)
            } else {
                TauWire::Named("inf".into())
            },
            samples: s.samples.clone(),
        }
    }
}

impl TryFrom<PriorityWire> for PrioritySketch {
    type Error = Error;

    fn try_from(w: PriorityWire) -> Result<Self> {
        if w.method != "priority" {
            return Err(Error::InvalidSketch(format!(
                "expected method 'priority', found '{}'",
                w.method
            )));
        }
        let tau = match w.tau {
            TauWire::Finite(t) => t,
            TauWire::Named(s) if s == "inf" => f64::INFINITY,
            TauWire::Named(s) => {
                return Err(Error::InvalidSketch(format!("tau must be a number or \"inf\", found \"{s}\"")))
            }
        };
        let sketch = PrioritySketch {
            k: w.k,
            tau,
            samples: w.samples,
        };
        sketch.validate()?;
        Ok(sketch)
    }
}
