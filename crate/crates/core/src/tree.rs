//! Binary sum trees over nonnegative weights.
//!
//! A [`WeightTree`] stores leaves in an implicit heap: node `k` has children
//! `2k` and `2k + 1`, the root is node 1, and leaf `j` lives at
//! `capacity + j`. Every internal node holds the sum of its children, so
//! updating a leaf walks up one path and sampling walks down one path.
//!
//! For the vector `(1, 2, 3, 4)` the tree is
//!
//! ```text
//!         10
//!       3    7
//!      1 2  3 4
//! ```
//!
//! Multiplicative-weights iterates grow like `exp(Θ(√t))`, so stored values are
//! kept near 1 by an automatic renormalization and the common factor is kept
//! separately as a natural logarithm.

use std::cell::Cell;
use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Stored totals outside `[2^-512, 2^512]` trigger a renormalization sweep.
const RESCALE_LOW: f64 = f64::from_bits((1023 - 512) << 52);
const RESCALE_HIGH: f64 = f64::from_bits((1023 + 512) << 52);

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}

#[derive(Debug, Clone)]
pub struct WeightTree {
    len: usize,
    capacity: usize,
    nodes: Vec<f64>,
    /// Natural log of the factor multiplying every stored weight.
    log_scale: f64,
    touches: Cell<u64>,
    rescales: u64,
}

impl WeightTree {
    /// Builds a tree holding `weights` with unit scale.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        for &w in weights {
            check_weight(w)?;
        }
        let capacity = weights.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * capacity];
        nodes[capacity..capacity + weights.len()].copy_from_slice(weights);
        let mut tree = WeightTree {
            len: weights.len(),
            capacity,
            nodes,
            log_scale: 0.0,
            touches: Cell::new(0),
            rescales: 0,
        };
        tree.rebuild_internal();
        Ok(tree)
    }

    /// A tree of `len` zero leaves.
    pub fn zeros(len: usize) -> Self {
        Self::from_weights(&vec![0.0; len]).expect("zero weights are valid")
    }

    /// Builds a tree whose leaf `j` has logical weight `exp(log_weights[j])`.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let mut tree = Self::zeros(log_weights.len());
        tree.reset_from_log_weights(log_weights)?;
        Ok(tree)
    }

    /// Overwrites every leaf with `exp(log_weights[j])`, stored relative to the max.
    pub fn reset_from_log_weights(&mut self, log_weights: &[f64]) -> Result<()> {
        if log_weights.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: log_weights.len(),
            });
        }
        if let Some(&bad) = log_weights.iter().find(|l| l.is_nan() || **l == f64::INFINITY) {
            return Err(Error::InvalidWeight(bad));
        }
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if max.is_finite() { max } else { 0.0 };
        for (j, &l) in log_weights.iter().enumerate() {
            self.nodes[self.capacity + j] = (l - shift).exp();
        }
        self.log_scale = shift;
        self.rebuild_internal();
        Ok(())
    }

    fn rebuild_internal(&mut self) {
        for k in (1..self.capacity).rev() {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stored value of heap node `k` (root is 1), before applying the scale.
    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn stored_total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Logical total. May overflow to infinity; prefer [`Self::log_total`].
    pub fn total(&self) -> f64 {
        self.nodes[1] * self.log_scale.exp()
    }

    pub fn log_total(&self) -> f64 {
        self.nodes[1].ln() + self.log_scale
    }

    pub fn stored(&self, j: usize) -> f64 {
        self.nodes[self.capacity + j]
    }

    /// Logical weight of leaf `j`. May overflow; prefer [`Self::log_weight`].
    pub fn weight(&self, j: usize) -> f64 {
        self.stored(j) * self.log_scale.exp()
    }

    pub fn log_weight(&self, j: usize) -> f64 {
        self.stored(j).ln() + self.log_scale
    }

    /// Sampling probabilities `w_j / W` for the logical leaves.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.stored_total();
        (0..self.len).map(|j| self.stored(j) / total).collect()
    }

    /// Node reads and writes performed by update and sampling calls so far.
    pub fn touches(&self) -> u64 {
        self.touches.get()
    }

    /// Number of renormalization sweeps performed, automatic or explicit.
    pub fn rescales(&self) -> u64 {
        self.rescales
    }

    fn touch(&self, k: u64) {
        self.touches.set(self.touches.get() + k);
    }

    fn check_leaf(&self, j: usize) -> Result<()> {
        if j < self.len {
            Ok(())
        } else {
            Err(Error::LeafOutOfRange {
                leaf: j,
                len: self.len,
            })
        }
    }

    fn propagate(&mut self, j: usize) {
        let mut k = self.capacity + j;
        // One sibling read and one parent write per level.
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
            self.touch(2);
        }
    }

    fn maybe_rescale(&mut self) {
        let total = self.nodes[1];
        if total > 0.0 && !(RESCALE_LOW..=RESCALE_HIGH).contains(&total) {
            self.rescale();
        }
    }

    /// Multiplies the logical weight of leaf `j` by `factor`.
    pub fn multiply(&mut self, j: usize, factor: f64) -> Result<()> {
        self.check_leaf(j)?;
        check_weight(factor)?;
        self.nodes[self.capacity + j] *= factor;
        self.touch(1);
        self.propagate(j);
        self.maybe_rescale();
        Ok(())
    }

    /// Adds `delta ≥ 0` to the logical weight of leaf `j`.
    pub fn add(&mut self, j: usize, delta: f64) -> Result<()> {
        self.check_leaf(j)?;
        check_weight(delta)?;
        self.nodes[self.capacity + j] += delta * (-self.log_scale).exp();
        self.touch(1);
        self.propagate(j);
        self.maybe_rescale();
        Ok(())
    }

    /// Appends a leaf, doubling the capacity when full. Returns its index.
    pub fn push(&mut self, weight: f64) -> Result<usize> {
        check_weight(weight)?;
        if self.len == self.capacity {
            let old = self.capacity;
            let capacity = old * 2;
            let mut nodes = vec![0.0; 2 * capacity];
            nodes[capacity..capacity + old].copy_from_slice(&self.nodes[old..2 * old]);
            self.nodes = nodes;
            self.capacity = capacity;
            self.rebuild_internal();
        }
        let j = self.len;
        self.len += 1;
        self.add(j, weight)?;
        Ok(j)
    }

    /// Divides stored weights by their total and folds it into the scale.
    ///
    /// Sampling probabilities are unchanged. A zero tree is left alone.
    pub fn rescale(&mut self) {
        let total = self.nodes[1];
        if !(total > 0.0) {
            return;
        }
        for v in &mut self.nodes[1..] {
            *v /= total;
        }
        self.log_scale += total.ln();
        self.rescales += 1;
    }

    /// Draws leaf `j` with probability `w_j / W`, one uniform per level.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.touch(1);
        if !(self.nodes[1] > 0.0) {
            return Err(Error::EmptyDistribution);
        }
        let mut k = 1;
        while k < self.capacity {
            let left = self.nodes[2 * k];
            let right = self.nodes[2 * k + 1];
            self.touch(2);
            let u: f64 = rng.gen();
            k = if u * (left + right) < left { 2 * k } else { 2 * k + 1 };
        }
        Ok(k - self.capacity)
    }
}

/// Nonnegative weights over `0..dim` whose tree only holds the support.
///
/// Used for the cumulative strategies `x` and `y`: slots are allocated the
/// first time a pure strategy receives weight.
#[derive(Debug, Clone)]
pub struct SparseWeights {
    dim: usize,
    tree: WeightTree,
    slot_of: HashMap<usize, usize>,
    support: Vec<usize>,
    total: f64,
}

impl SparseWeights {
    pub fn new(dim: usize) -> Self {
        SparseWeights {
            dim,
            tree: WeightTree::zeros(0),
            slot_of: HashMap::new(),
            support: Vec::new(),
            total: 0.0,
        }
    }

    /// Builds from a dense weight vector; zero entries stay out of the support.
    pub fn from_dense(weights: &[f64]) -> Result<Self> {
        let mut w = SparseWeights::new(weights.len());
        for (i, &v) in weights.iter().enumerate() {
            check_weight(v)?;
            if v > 0.0 {
                w.add(i, v)?;
            }
        }
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `delta` to coordinate `index`.
    pub fn add(&mut self, index: usize, delta: f64) -> Result<()> {
        if index >= self.dim {
            return Err(Error::LeafOutOfRange {
                leaf: index,
                len: self.dim,
            });
        }
        check_weight(delta)?;
        match self.slot_of.get(&index) {
            Some(&slot) => self.tree.add(slot, delta)?,
            None => {
                let slot = self.tree.push(delta)?;
                self.slot_of.insert(index, slot);
                self.support.push(index);
            }
        }
        self.total += delta;
        Ok(())
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.slot_of.get(&index).map_or(0.0, |&s| self.tree.weight(s))
    }

    /// Running sum of every added delta.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Number of coordinates with weight.
    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// `(index, weight)` pairs in first-touched order.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support
            .iter()
            .enumerate()
            .map(move |(slot, &i)| (i, self.tree.weight(slot)))
    }

    pub fn tree(&self) -> &WeightTree {
        &self.tree
    }

    /// Draws `i` with probability `w_i / ‖w‖₁`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.tree.sample(rng).map(|slot| self.support[slot])
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, w) in self.support() {
            out[i] = w;
        }
        out
    }
}
