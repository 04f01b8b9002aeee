//! Proportional prioritized replay.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SumTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerConfig {
    pub capacity: usize,
    /// Priority exponent `c`.
    pub priority_exponent: f64,
    pub is_exponent_start: f64,
    pub is_exponent_end: f64,
    pub priority_floor: f64,
}

impl Default for PerConfig {
    fn default() -> Self {
        Self {
            capacity: 1 << 17,
            priority_exponent: 0.6,
            is_exponent_start: 0.4,
            is_exponent_end: 0.6,
            priority_floor: 1e-6,
        }
    }
}

impl PerConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if self.capacity == 0 || !self.capacity.is_power_of_two() {
            errors.push(format!(
                "per.capacity must be a power of two, got {}",
                self.capacity
            ));
        }
        if !(0.0..=1.0).contains(&self.priority_exponent) {
            errors.push(format!(
                "per.priority_exponent must be in [0, 1], got {}",
                self.priority_exponent
            ));
        }
        let (b0, b1) = (self.is_exponent_start, self.is_exponent_end);
        if !(0.0 <= b0 && b0 <= b1 && b1 <= 1.0) {
            errors.push(format!(
                "per importance exponents need 0 <= start <= end <= 1, got {b0} and {b1}"
            ));
        }
        if !(self.priority_floor > 0.0 && self.priority_floor.is_finite()) {
            errors.push(format!(
                "per.priority_floor must be positive, got {}",
                self.priority_floor
            ));
        }
    }

    /// Importance-sampling exponent at training progress in [0, 1].
    pub fn anneal_b(&self, progress: f64) -> f64 {
        let p = progress.clamp(0.0, 1.0);
        self.is_exponent_start + p * (self.is_exponent_end - self.is_exponent_start)
    }

    /// Stored priority `(|delta| + floor)^c`.
    pub fn priority(&self, td_error: f64) -> f64 {
        (td_error.abs() + self.priority_floor).powf(self.priority_exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledBatch<'a, T> {
    pub items: Vec<&'a T>,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Ring buffer of items with sum-tree priorities. Single owner.
#[derive(Debug, Clone)]
pub struct PrioritizedReplay<T> {
    config: PerConfig,
    tree: SumTree,
    items: Vec<T>,
}

impl<T> PrioritizedReplay<T> {
    pub fn new(config: PerConfig) -> Result<Self> {
        Ok(Self {
            tree: SumTree::new(config.capacity)?,
            items: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &PerConfig {
        &self.config
    }

    pub fn tree(&self) -> &SumTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Items in slot order.
    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }

    /// Inserts at the current maximum leaf priority (1 for an empty buffer).
    pub fn push(&mut self, item: T) -> usize {
        let p = if self.tree.max() > 0.0 {
            self.tree.max()
        } else {
            1.0
        };
        self.push_with_priority(item, p)
    }

    /// Inserts with an explicit stored priority.
    pub fn push_with_priority(&mut self, item: T, priority: f64) -> usize {
        let i = self.tree.push(priority);
        if i == self.items.len() {
            self.items.push(item);
        } else {
            self.items[i] = item;
        }
        i
    }

    /// One draw per equal-mass stratum; weights `(N P(i))^-b` normalized by
    /// the batch maximum.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        b: f64,
        rng: &mut R,
    ) -> Result<SampledBatch<'_, T>> {
        let n = self.len();
        if n == 0 || n < batch_size {
            return Err(Error::InsufficientSamples {
                requested: batch_size,
                available: n,
            });
        }
        let total = self.tree.total();
        let segment = total / batch_size as f64;
        let mut indices = Vec::with_capacity(batch_size);
        let mut weights = Vec::with_capacity(batch_size);
        for k in 0..batch_size {
            let mass = segment * (k as f64 + rng.random::<f64>());
            let i = self.tree.find(mass.min(total));
            let prob = self.tree.get(i) / total;
            indices.push(i);
            weights.push((n as f64 * prob).powf(-b));
        }
        let max = weights.iter().copied().fold(0.0, f64::max);
        for w in &mut weights {
            *w /= max;
        }
        let items = indices.iter().map(|&i| &self.items[i]).collect();
        Ok(SampledBatch {
            items,
            indices,
            weights,
        })
    }

    /// Sets sampled leaves from fresh TD errors. An index whose item was
    /// overwritten since sampling updates the current occupant.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::Dimension {
                expected: indices.len(),
                actual: td_errors.len(),
            });
        }
        for (&i, &d) in indices.iter().zip(td_errors) {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "replay index {i} out of range"
                )));
            }
            if !d.is_finite() {
                return Err(Error::NonFinite("td error"));
            }
            self.tree.set(i, self.config.priority(d));
        }
        Ok(())
    }

    /// Rebuilds a buffer from a saved tree and items in slot order.
    pub fn from_parts(config: PerConfig, tree: SumTree, items: Vec<T>) -> Result<Self> {
        if tree.capacity() != config.capacity || items.len() != tree.len() {
            return Err(Error::InvalidArgument(
                "replay parts are inconsistent".into(),
            ));
        }
        Ok(Self {
            config,
            tree,
            items,
        })
    }
}
