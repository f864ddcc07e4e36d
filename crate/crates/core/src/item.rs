//! Weighted items, populations and rank draws shared by every sampler.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeedSpec;

/// An input weight and its ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedItem {
    pub index: u64,
    pub weight: f64,
}

impl WeightedItem {
    pub fn new(index: u64, weight: f64) -> Result<Self> {
        check_weight(index, weight)?;
        Ok(WeightedItem { index, weight })
    }
}

pub(crate) fn check_weight(index: u64, weight: f64) -> Result<()> {
    if weight.is_nan() || weight.is_infinite() {
        return Err(Error::NonFiniteWeight { index });
    }
    if weight < 0.0 {
        return Err(Error::NegativeWeight { index, weight });
    }
    Ok(())
}

/// A weighted item together with its drawn uniform and rank `uniform / weight`.
///
/// Zero-weight items get rank `+inf` and are never sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedItem {
    pub index: u64,
    pub weight: f64,
    pub uniform: f64,
    pub rank: f64,
}

impl RankedItem {
    /// Draws the uniform keyed on `(seed, item.index)`.
    #[inline]
    pub fn draw(item: WeightedItem, seed: SeedSpec) -> Self {
        let uniform = seed.uniform(item.index);
        RankedItem {
            index: item.index,
            weight: item.weight,
            uniform,
            rank: rank_of(uniform, item.weight),
        }
    }
}

#[inline]
pub(crate) fn rank_of(uniform: f64, weight: f64) -> f64 {
    if weight > 0.0 {
        uniform / weight
    } else {
        f64::INFINITY
    }
}

/// Total order on ranked items: by rank, then by smaller index.
#[inline]
pub fn rank_order(a: &RankedItem, b: &RankedItem) -> Ordering {
    a.rank.total_cmp(&b.rank).then(a.index.cmp(&b.index))
}

/// A validated, non-empty collection of weighted items with its total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    items: Vec<WeightedItem>,
    total_weight: f64,
}

impl Population {
    /// Builds a population from explicit items. Indices must be unique.
    pub fn new(items: Vec<WeightedItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            check_weight(item.index, item.weight)?;
            if !seen.insert(item.index) {
                return Err(Error::DuplicateIndex { index: item.index });
            }
        }
        let total_weight = compensated_sum(items.iter().map(|i| i.weight));
        Ok(Population {
            items,
            total_weight,
        })
    }

    /// Builds a population indexed `0..n` in slice order.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .enumerate()
                .map(|(i, &weight)| WeightedItem {
                    index: i as u64,
                    weight,
                })
                .collect(),
        )
    }

    pub fn items(&self) -> &[WeightedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|i| i.weight)
    }

    /// Sum of squared weights.
    pub fn sum_of_squares(&self) -> f64 {
        compensated_sum(self.weights().map(|w| w * w))
    }

    /// Number of items with strictly positive weight.
    pub fn positive_count(&self) -> usize {
        self.items.iter().filter(|i| i.weight > 0.0).count()
    }

    /// Weight of the item with the given index.
    pub fn weight_of(&self, index: u64) -> Option<f64> {
        self.items
            .iter()
            .find(|i| i.index == index)
            .map(|i| i.weight)
    }
}

/// Compensated sum of non-negative weights.
pub fn total_weight(weights: &[f64]) -> Result<f64> {
    for (i, &w) in weights.iter().enumerate() {
        check_weight(i as u64, w)?;
    }
    Ok(compensated_sum(weights.iter().copied()))
}

/// Neumaier's variant of Kahan summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Draws one uniform per item, keyed on `(seed, index)`, in population order.
pub fn draw_ranks(population: &Population, seed: SeedSpec) -> Vec<RankedItem> {
    population
        .items()
        .iter()
        .map(|&item| RankedItem::draw(item, seed))
        .collect()
}
