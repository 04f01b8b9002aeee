//! Binary sum tree over leaf priorities with a parallel max tree.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SumTree {
    capacity: usize,
    sums: Vec<f64>,
    maxes: Vec<f64>,
    cursor: usize,
    len: usize,
}

impl SumTree {
    /// `capacity` must be a power of two.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 || !capacity.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "sum tree capacity {capacity} is not a power of two"
            )));
        }
        Ok(Self {
            capacity,
            sums: vec![0.0; 2 * capacity],
            maxes: vec![0.0; 2 * capacity],
            cursor: 0,
            len: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Next slot to be written.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn total(&self) -> f64 {
        self.sums[1]
    }

    pub fn max(&self) -> f64 {
        self.maxes[1]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.sums[self.capacity + index]
    }

    pub fn leaves(&self) -> &[f64] {
        &self.sums[self.capacity..]
    }

    /// Writes `priority` at the cursor, overwriting the oldest leaf once full.
    /// Returns the slot index.
    pub fn push(&mut self, priority: f64) -> usize {
        let i = self.cursor;
        self.set(i, priority);
        self.cursor = (self.cursor + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        i
    }

    pub fn set(&mut self, index: usize, priority: f64) {
        assert!(index < self.capacity, "leaf {index} out of range");
        assert!(
            priority >= 0.0 && priority.is_finite(),
            "priority must be finite and non-negative, got {priority}"
        );
        let mut node = self.capacity + index;
        self.sums[node] = priority;
        self.maxes[node] = priority;
        while node > 1 {
            node /= 2;
            self.sums[node] = self.sums[2 * node] + self.sums[2 * node + 1];
            self.maxes[node] = self.maxes[2 * node].max(self.maxes[2 * node + 1]);
        }
    }

    /// Leaf whose cumulative interval contains `mass`: the first `i` with
    /// `sum(leaves[..=i]) > mass`. Never returns a zero-priority leaf when
    /// the total is positive.
    pub fn find(&self, mass: f64) -> usize {
        let mut node = 1;
        let mut mass = mass.max(0.0);
        while node < self.capacity {
            let left = 2 * node;
            if mass < self.sums[left] || self.sums[left + 1] <= 0.0 {
                node = left;
            } else {
                mass -= self.sums[left];
                node = left + 1;
            }
        }
        node - self.capacity
    }

    /// Rebuilds a tree from stored leaves.
    pub fn from_leaves(capacity: usize, leaves: &[f64], cursor: usize, len: usize) -> Result<Self> {
        let mut t = Self::new(capacity)?;
        if leaves.len() != capacity || cursor >= capacity || len > capacity {
            return Err(Error::InvalidArgument(
                "sum tree layout does not match capacity".into(),
            ));
        }
        if leaves.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::NonFinite("sum tree leaf"));
        }
        t.sums[capacity..].copy_from_slice(leaves);
        t.maxes[capacity..].copy_from_slice(leaves);
        for node in (1..capacity).rev() {
            t.sums[node] = t.sums[2 * node] + t.sums[2 * node + 1];
            t.maxes[node] = t.maxes[2 * node].max(t.maxes[2 * node + 1]);
        }
        t.cursor = cursor;
        t.len = len;
        Ok(t)
    }
}
