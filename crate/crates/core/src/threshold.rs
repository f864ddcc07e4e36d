//! Threshold (Poisson) sampling.
//!
//! Every item whose rank `u_i / w_i` is at most a fixed threshold `tau` is
//! kept, which happens independently with probability `p_i = min(1, w_i * tau)`.
//! Weighting each kept item by `w_i / p_i` gives the Horvitz-Thompson estimator
//! of any subset sum. Sample size is random with mean `sum_i p_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::{check_weight, Population, RankedItem};

/// A sampled item and its inclusion probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub index: u64,
    pub weight: f64,
    pub p: f64,
}

impl ThresholdEntry {
    /// Horvitz-Thompson weight `w / p`.
    pub fn estimate(&self) -> f64 {
        if self.p >= 1.0 {
            self.weight
        } else {
            self.weight / self.p
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSketch {
    tau: f64,
    entries: Vec<ThresholdEntry>,
}

#[inline]
fn inclusion_probability(weight: f64, tau: f64) -> f64 {
    (weight * tau).min(1.0)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidThreshold { tau })
    }
}

/// `tau = k / W`, which keeps at most `k` items in expectation.
pub fn threshold_for_budget(population: &Population, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidK { k, min: 1 });
    }
    let w = population.total_weight();
    if w <= 0.0 {
        return Err(Error::DegeneratePopulation);
    }
    Ok(k as f64 / w)
}

/// Expected sample size `sum_i min(1, w_i * tau)`.
pub fn expected_sample_count(population: &Population, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(crate::item::compensated_sum(
        population.weights().map(|w| inclusion_probability(w, tau)),
    ))
}

/// Total-variance bound `W^2 / k` at `tau = k / W`.
pub fn threshold_variance_bound(population: &Population, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidK { k, min: 1 });
    }
    let w = population.total_weight();
    Ok(w * w / k as f64)
}

impl ThresholdSketch {
    /// Keeps exactly the items with `rank <= tau`.
    pub fn build(ranked: &[RankedItem], tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let entries = ranked
            .iter()
            .filter(|r| r.rank <= tau)
            .map(|r| ThresholdEntry {
                index: r.index,
                weight: r.weight,
                p: inclusion_probability(r.weight, tau),
            })
            .collect();
        Ok(ThresholdSketch { tau, entries })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sampled indices with `w_i * tau < 1`, the only ones with nonzero variance.
    pub fn below_one(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.weight * self.tau < 1.0)
            .map(|e| e.index)
    }

    /// Horvitz-Thompson estimate of the weight sum over indices matching `subset`.
    pub fn ht_estimate(&self, subset: impl Fn(u64) -> bool) -> f64 {
        crate::item::compensated_sum(
            self.entries
                .iter()
                .filter(|e| subset(e.index))
                .map(ThresholdEntry::estimate),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ThresholdWire::from(self)).expect("sketch serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: ThresholdWire =
            serde_json::from_str(s).map_err(|e| Error::InvalidSketch(e.to_string()))?;
        wire.try_into()
    }

    fn validate(&self) -> Result<()> {
        check_tau(self.tau).map_err(|e| Error::InvalidSketch(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            check_weight(e.index, e.weight).map_err(|err| Error::InvalidSketch(err.to_string()))?;
            if !seen.insert(e.index) {
                return Err(Error::InvalidSketch(format!("duplicate index {}", e.index)));
            }
            if e.weight == 0.0 {
                return Err(Error::InvalidSketch(format!(
                    "zero-weight item {} cannot be sampled",
                    e.index
                )));
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(Error::InvalidSketch(format!(
                    "inclusion probability {} of item {} outside (0, 1]",
                    e.p, e.index
                )));
            }
            if e.p != inclusion_probability(e.weight, self.tau) {
                return Err(Error::InvalidSketch(format!(
                    "inclusion probability of item {} is not min(1, w * tau)",
                    e.index
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ThresholdWire {
    method: String,
    tau: f64,
    entries: Vec<ThresholdEntry>,
}

impl From<&ThresholdSketch> for ThresholdWire {
    fn from(s: &ThresholdSketch) -> Self {
        ThresholdWire {
            method: "threshold".into(),
            tau: s.tau,
            entries: s.entries.clone(),
        }
    }
}

impl TryFrom<ThresholdWire> for ThresholdSketch {
    type Error = Error;

    fn try_from(w: ThresholdWire) -> Result<Self> {
        if w.method != "threshold" {
            return Err(Error::InvalidSketch(format!(
                "expected method 'threshold', found '{}'",
                w.method
            )));
        }
        let sketch = ThresholdSketch {
            tau: w.tau,
            entries: w.entries,
        };
        sketch.validate()?;
        Ok(sketch)
    }
}
