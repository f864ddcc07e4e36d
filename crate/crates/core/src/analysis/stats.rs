//! Mergeable moment accumulators.

use serde::{Deserialize, Serialize};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Power sums of `x - shift` up to the fourth order.
///
/// Shifting by a known or approximate mean keeps the central moments free of
/// cancellation; an exact shift makes a constant variable report exactly zero
/// variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PowerSums {
    shift: f64,
    count: u64,
    s: [f64; 4],
}

impl PowerSums {
    pub fn new(shift: f64) -> Self {
        PowerSums {
            shift,
            count: 0,
            s: [0.0; 4],
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let d = x - self.shift;
        let d2 = d * d;
        self.count += 1;
        self.s[0] += d;
        self.s[1] += d2;
        self.s[2] += d2 * d;
        self.s[3] += d2 * d2;
    }

    /// Adds `n` observations whose first two shifted power sums are known.
    /// Only valid for accumulators whose third and fourth moments are unused.
    pub fn push_raw2(&mut self, n: u64, sum: f64, sum_sq: f64) {
        let c = self.shift;
        let nf = n as f64;
        self.count += n;
        self.s[0] += sum - nf * c;
        self.s[1] += sum_sq - 2.0 * c * sum + nf * c * c;
    }

    pub fn merge(&mut self, other: &PowerSums) {
        debug_assert_eq!(self.shift, other.shift);
        self.count += other.count;
        for (a, b) in self.s.iter_mut().zip(other.s) {
            *a += b;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn shifted_means(&self) -> [f64; 4] {
        let n = self.count as f64;
        self.s.map(|v| v / n)
    }

    /// Central moments `(m2, m3, m4)` about the sample mean.
    fn central(&self) -> (f64, f64, f64, f64) {
        let [a1, a2, a3, a4] = self.shifted_means();
        let m2 = (a2 - a1 * a1).max(0.0);
        let m3 = a3 - 3.0 * a1 * a2 + 2.0 * a1.powi(3);
        let m4 = (a4 - 4.0 * a1 * a3 + 6.0 * a1 * a1 * a2 - 3.0 * a1.powi(4)).max(0.0);
        (a1, m2, m3, m4)
    }

    pub fn mean(&self) -> Estimate {
        let (a1, m2, _, _) = self.central();
        let n = self.count as f64;
        Estimate {
            value: self.shift + a1,
            se: (m2 / (n - 1.0)).sqrt(),
        }
    }

    /// Unbiased sample variance and the asymptotic standard error
    /// `sqrt((m4 - m2^2) / n)`.
    pub fn variance(&self) -> Estimate {
        let (_, m2, _, m4) = self.central();
        let n = self.count as f64;
        Estimate {
            value: m2 * n / (n - 1.0),
            se: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        }
    }

    /// Mean of `x^2` and its standard error.
    pub fn mean_of_squares(&self) -> Estimate {
        let [a1, a2, a3, a4] = self.shifted_means();
        let c = self.shift;
        // raw moments about zero from moments about the shift
        let r2 = a2 + 2.0 * c * a1 + c * c;
        let r4 = a4 + 4.0 * c * a3 + 6.0 * c * c * a2 + 4.0 * c.powi(3) * a1 + c.powi(4);
        let n = self.count as f64;
        Estimate {
            value: r2,
            se: ((r4 - r2 * r2).max(0.0) / (n - 1.0)).sqrt(),
        }
    }
}

/// Reduces `items` pairwise in a fixed tree shape so the result depends only
/// on their order, not on how they were produced.
pub(crate) fn tree_reduce<T>(mut items: Vec<T>, merge: impl Fn(&mut T, &T)) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(mut a) = iter.next() {
            if let Some(b) = iter.next() {
                merge(&mut a, &b);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop()
}
