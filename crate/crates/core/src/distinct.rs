//! K-minimum-values distinct counting.
//!
//! Each item is hashed to a uniform value in (0, 1) and the sketch keeps the
//! `k + 1` smallest distinct values. With `tau` the `(k+1)`-st smallest, the
//! estimate `k / tau` is unbiased for the number of distinct items `D` (for an
//! ideal hash), with relative standard deviation `sqrt((D - k) / (D (k - 1)))`.
//! While fewer than `k + 1` distinct hashes have been seen the count is exact.

use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};
use crate::rng::mix64;

const HASH_BITS: u32 = 53;
const HASH_SCALE: f64 = 1.0 / (1u64 << HASH_BITS) as f64;

/// Hashes `item` to a nonzero 53-bit key; the unit-interval value is
/// `key / 2^53`. A zero key is rejected by rehashing with a perturbed seed.
pub fn hash_key(item: &[u8], hash_seed: u64) -> u64 {
    let mut seed = hash_seed;
    loop {
        let key = xxh3_64_with_seed(item, seed) >> (64 - HASH_BITS);
        if key != 0 {
            return key;
        }
        seed = mix64(seed.wrapping_add(1));
    }
}

#[inline]
pub fn key_to_unit(key: u64) -> f64 {
    key as f64 * HASH_SCALE
}

#[derive(Debug, Clone)]
pub struct KmvSketch {
    k: usize,
    hash_seed: u64,
    heap: BinaryHeap<u64>,
    members: HashSet<u64>,
}

impl PartialEq for KmvSketch {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.hash_seed == other.hash_seed && self.members == other.members
    }
}

impl KmvSketch {
    pub fn new(k: usize, hash_seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK { k, min: 1 });
        }
        Ok(KmvSketch {
            k,
            hash_seed,
            heap: BinaryHeap::with_capacity(k + 2),
            members: HashSet::with_capacity(k + 2),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hash_seed(&self) -> u64 {
        self.hash_seed
    }

    pub fn insert(&mut self, item: &[u8]) {
        self.insert_key(hash_key(item, self.hash_seed));
    }

    fn insert_key(&mut self, key: u64) {
        if self.members.contains(&key) {
            return;
        }
        if self.heap.len() <= self.k {
            self.heap.push(key);
            self.members.insert(key);
        } else if let Some(mut root) = self.heap.peek_mut() {
            if key < *root {
                self.members.remove(&*root);
                self.members.insert(key);
                *root = key;
            }
        }
    }

    /// True while fewer than `k + 1` distinct hashes have been seen.
    pub fn exact_mode(&self) -> bool {
        self.heap.len() <= self.k
    }

    /// Number of retained hashes, at most `k + 1`.
    pub fn retained(&self) -> usize {
        self.heap.len()
    }

    /// The `(k+1)`-st smallest hash value, once it exists.
    pub fn tau(&self) -> Option<f64> {
        (!self.exact_mode()).then(|| key_to_unit(*self.heap.peek().expect("non-empty")))
    }

    pub fn estimate(&self) -> f64 {
        match self.tau() {
            Some(tau) => self.k as f64 / tau,
            None => self.heap.len() as f64,
        }
    }

    /// Retained keys in ascending order.
    pub fn smallest(&self) -> Vec<u64> {
        let mut keys: Vec<u64> = self.heap.iter().copied().collect();
        keys.sort_unstable();
        keys
    }

    /// Sketch of the union of both input streams. Requires equal `k` and seed.
    pub fn merge(&self, other: &KmvSketch) -> Result<KmvSketch> {
        if self.hash_seed != other.hash_seed {
            return Err(Error::Merge(format!(
                "hash seeds differ ({} vs {})",
                self.hash_seed, other.hash_seed
            )));
        }
        if self.k != other.k {
            return Err(Error::Merge(format!("k differs ({} vs {})", self.k, other.k)));
        }
        let union: BTreeSet<u64> = self.heap.iter().chain(other.heap.iter()).copied().collect();
        let mut merged = KmvSketch::new(self.k, self.hash_seed)?;
        for key in union.into_iter().take(self.k + 1) {
            merged.insert_key(key);
        }
        Ok(merged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&KmvWire {
            method: "kmv".into(),
            k: self.k,
            hash_seed: self.hash_seed,
            smallest: self.smallest(),
        })
        .expect("sketch serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: KmvWire =
            serde_json::from_str(s).map_err(|e| Error::InvalidSketch(e.to_string()))?;
        if wire.method != "kmv" {
            return Err(Error::InvalidSketch(format!(
                "expected method 'kmv', found '{}'",
                wire.method
            )));
        }
        let mut sketch =
            KmvSketch::new(wire.k, wire.hash_seed).map_err(|e| Error::InvalidSketch(e.to_string()))?;
        if wire.smallest.len() > wire.k + 1 {
            return Err(Error::InvalidSketch(format!(
                "{} hashes exceed k + 1 = {}",
                wire.smallest.len(),
                wire.k + 1
            )));
        }
        for &key in &wire.smallest {
            if key == 0 || key >= 1u64 << HASH_BITS {
                return Err(Error::InvalidSketch(format!("hash key {key} out of range")));
            }
            if sketch.members.contains(&key) {
                return Err(Error::InvalidSketch(format!("duplicate hash key {key}")));
            }
            sketch.insert_key(key);
        }
        Ok(sketch)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KmvWire {
    method: String,
    k: usize,
    hash_seed: u64,
    smallest: Vec<u64>,
}
