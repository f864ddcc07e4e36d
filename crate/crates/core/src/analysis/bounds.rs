//! Closed-form variance bounds for priority sampling and inverse-threshold
//! moments for the uniform case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::{compensated_sum, Population};
use crate::threshold::threshold_variance_bound;

/// `W^2 / (k - 1)`: bound on the total variance of priority sampling.
pub fn variance_bound_basic(population: &Population, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::BoundUndefined { k });
    }
    let w = population.total_weight();
    Ok(w * w / (k - 1) as f64)
}

/// `(W^2 - sum w_i^2) / (k - 1) - sum_{i >= k} w_(i)^2`, where `w_(i)` is the
/// i-th largest weight (1-based). The tail sum is empty when `k > n`.
pub fn variance_bound_tight(population: &Population, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::BoundUndefined { k });
    }
    let w = population.total_weight();
    let mut sorted: Vec<f64> = population.weights().collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let tail = compensated_sum(sorted.iter().skip(k - 1).map(|x| x * x));
    Ok((w * w - population.sum_of_squares()) / (k - 1) as f64 - tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub basic_bound: f64,
    pub tight_bound: f64,
    pub threshold_bound: f64,
}

impl BoundReport {
    pub fn compute(population: &Population, k: usize) -> Result<Self> {
        Ok(BoundReport {
            basic_bound: variance_bound_basic(population, k)?,
            tight_bound: variance_bound_tight(population, k)?,
            threshold_bound: threshold_variance_bound(population, k)?,
        })
    }
}

/// Moments of `1 / tau` where `tau` is the `(k+1)`-st smallest of `n` iid
/// uniforms on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformTauMoments {
    /// `n / k`
    pub mean_inv_tau: f64,
    /// `(n^2 - n k) / (k^2 (k - 1))`; `None` for `k < 2`, where it is infinite.
    pub var_inv_tau: Option<f64>,
}

pub fn uniform_tau_moments(n: usize, k: usize) -> Result<UniformTauMoments> {
    if k == 0 || k + 1 > n {
        return Err(Error::OrderStatisticUndefined { n, k });
    }
    let (nf, kf) = (n as f64, k as f64);
    let var_inv_tau = (k >= 2).then(|| (nf * nf - nf * kf) / (kf * kf * (kf - 1.0)));
    Ok(UniformTauMoments {
        mean_inv_tau: nf / kf,
        var_inv_tau,
    })
}
