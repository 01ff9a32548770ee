//! Occupancy bits for `n` leaves plus `n - 1` internal nodes, stored level-order
//! in one packed bit array.
//!
//! Node `i` has children `2i + 1` and `2i + 2`; the leaf for slot `s` is node
//! `(n_leaves - 1) + s`. A leaf bit is 0 when the slot is free and 1 when it is
//! used, and every internal bit is the AND of its children, so an internal 0
//! means "at least one free slot below here".
//!
//! When the requested capacity is not a power of two the leaf level is padded
//! with phantom leaves that are permanently 1. They are never handed out and
//! the index arithmetic stays branch-free.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AllocError;
use crate::policy::{AllocatorPolicy, PolicyKind};

const WORD_BITS: usize = u64::BITS as usize;

/// Position of a slot in the pool, `0..capacity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotIndex(pub usize);

impl SlotIndex {
    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for SlotIndex {
    fn from(value: usize) -> Self {
        SlotIndex(value)
    }
}

impl fmt::Display for SlotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which way a hinted descent leans once it has left the hint's path.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Steer {
    /// Still on the root-to-hint path.
    OnPath,
    /// Inside a subtree entirely left of the hint.
    Rightward,
    /// Inside a subtree entirely right of the hint.
    Leftward,
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitTree {
    capacity: usize,
    n_leaves: usize,
    /// Leaf depth, `log2(n_leaves)`.
    depth: u32,
    words: Vec<u64>,
    free_count: usize,
    op_steps: u64,
}

impl BitTree {
    /// A tree with `capacity` free slots.
    pub fn new(capacity: usize) -> Result<Self, AllocError> {
        let mut tree = Self::empty(capacity)?;
        tree.seal_phantoms_and_rebuild();
        Ok(tree)
    }

    /// A tree whose slot `s` is used iff `used[s]`.
    pub fn from_occupancy(used: &[bool]) -> Result<Self, AllocError> {
        let mut tree = Self::empty(used.len())?;
        let first_leaf = tree.n_leaves - 1;
        for (slot, _) in used.iter().enumerate().filter(|(_, u)| **u) {
            tree.set(first_leaf + slot, true);
        }
        tree.free_count = used.iter().filter(|u| !**u).count();
        tree.seal_phantoms_and_rebuild();
        Ok(tree)
    }

    fn empty(capacity: usize) -> Result<Self, AllocError> {
        if capacity == 0 {
            return Err(AllocError::ZeroCapacity);
        }
        let n_leaves = capacity
            .checked_next_power_of_two()
            .filter(|n| *n <= usize::MAX / 2)
            .ok_or(AllocError::CapacityTooLarge(capacity))?;
        let bit_len = 2 * n_leaves - 1;
        Ok(BitTree {
            capacity,
            n_leaves,
            depth: n_leaves.trailing_zeros(),
            words: vec![0; bit_len.div_ceil(WORD_BITS)],
            free_count: capacity,
            op_steps: 0,
        })
    }

    fn seal_phantoms_and_rebuild(&mut self) {
        let first_leaf = self.n_leaves - 1;
        for slot in self.capacity..self.n_leaves {
            self.set(first_leaf + slot, true);
        }
        for node in (0..first_leaf).rev() {
            let full = self.get(2 * node + 1) && self.get(2 * node + 2);
            self.set(node, full);
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Leaf count after rounding the capacity up to a power of two.
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Number of edges from the root to any leaf.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Total number of bits in the tree, `2 * n_leaves - 1`.
    pub fn bit_len(&self) -> usize {
        2 * self.n_leaves - 1
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    /// Running total of tree-node reads and writes performed by
    /// `allocate`, `release` and `allocate_with_hint`.
    pub fn op_steps(&self) -> u64 {
        self.op_steps
    }

    /// Raw bit at level-order `index`. Panics if `index >= bit_len()`.
    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.bit_len(), "bit index {index} out of range");
        self.get(index)
    }

    /// All bits in level order.
    pub fn bits(&self) -> Vec<bool> {
        (0..self.bit_len()).map(|i| self.get(i)).collect()
    }

    /// Level-order index of the leaf for `slot`.
    pub fn leaf_index(&self, slot: SlotIndex) -> usize {
        self.n_leaves - 1 + slot.get()
    }

    /// Slot stored at level-order `index`, if that node is a usable leaf.
    pub fn slot_of_leaf(&self, index: usize) -> Option<SlotIndex> {
        let first_leaf = self.n_leaves - 1;
        (index >= first_leaf && index - first_leaf < self.capacity).then(|| SlotIndex(index - first_leaf))
    }

    #[inline]
    fn get(&self, index: usize) -> bool {
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, index: usize, value: bool) {
        let mask = 1u64 << (index % WORD_BITS);
        let word = &mut self.words[index / WORD_BITS];
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    #[inline]
    fn read(&mut self, index: usize) -> bool {
        self.op_steps += 1;
        self.get(index)
    }

    #[inline]
    fn write(&mut self, index: usize, value: bool) {
        self.op_steps += 1;
        self.set(index, value);
    }

    fn check(&self, slot: SlotIndex) -> Result<(), AllocError> {
        if slot.get() < self.capacity {
            Ok(())
        } else {
            Err(AllocError::OutOfRange {
                slot: slot.get(),
                capacity: self.capacity,
            })
        }
    }

    /// Take the lowest-index free slot.
    pub fn allocate(&mut self) -> Result<SlotIndex, AllocError> {
        if self.read(0) {
            return Err(AllocError::PoolExhausted);
        }
        let first_leaf = self.n_leaves - 1;
        let mut node = 0;
        while node < first_leaf {
            let left = 2 * node + 1;
            // The parent is 0, so when the left child is full the right one is not.
            node = if self.read(left) { left + 1 } else { left };
        }
        self.mark_used(node);
        Ok(SlotIndex(node - first_leaf))
    }

    /// Take a free slot close to `hint`.
    ///
    /// The descent follows the root-to-hint path while the child on that path
    /// still has room. The first time it cannot, it crosses to the sibling and
    /// from then on leans back toward the hint at every level: rightward inside
    /// a subtree left of the hint, leftward inside one right of it. The result
    /// is always inside the smallest non-full subtree on the hint's path and is
    /// the hint itself when that slot is free, but it is not guaranteed to be
    /// the globally nearest free slot.
    pub fn allocate_with_hint(&mut self, hint: SlotIndex) -> Result<SlotIndex, AllocError> {
        self.check(hint)?;
        if self.read(0) {
            return Err(AllocError::PoolExhausted);
        }
        let first_leaf = self.n_leaves - 1;
        let hint_leaf = first_leaf + hint.get();
        let mut node = 0;
        let mut level = 0;
        let mut steer = Steer::OnPath;
        while node < first_leaf {
            let left = 2 * node + 1;
            let right = left + 1;
            level += 1;
            let preferred = match steer {
                Steer::OnPath => ancestor_at(hint_leaf, self.depth, level),
                Steer::Rightward => right,
                Steer::Leftward => left,
            };
            if !self.read(preferred) {
                node = preferred;
            } else {
                node = if preferred == left { right } else { left };
                if steer == Steer::OnPath {
                    steer = if node == left {
                        Steer::Rightward
                    } else {
                        Steer::Leftward
                    };
                }
            }
        }
        self.mark_used(node);
        Ok(SlotIndex(node - first_leaf))
    }

    /// Set `leaf` to used and push the change upward. Each parent becomes the
    /// AND of its children; the walk stops at the first parent whose bit does
    /// not change.
    fn mark_used(&mut self, leaf: usize) {
        self.write(leaf, true);
        let mut node = leaf;
        while node > 0 {
            let parent = (node - 1) / 2;
            let full = self.read(sibling(node));
            if self.read(parent) == full {
                break;
            }
            self.write(parent, full);
            node = parent;
        }
        self.free_count -= 1;
    }

    /// Return `slot` to the pool.
    ///
    /// Clears the leaf and every ancestor up to the first one that is already
    /// clear; everything above a clear bit is clear as well.
    pub fn release(&mut self, slot: SlotIndex) -> Result<(), AllocError> {
        self.check(slot)?;
        let mut node = self.leaf_index(slot);
        if !self.read(node) {
            return Err(AllocError::DoubleFree(slot.get()));
        }
        self.write(node, false);
        while node > 0 {
            node = (node - 1) / 2;
            if !self.read(node) {
                break;
            }
            self.write(node, false);
        }
        self.free_count += 1;
        Ok(())
    }

    pub fn is_slot_free(&self, slot: SlotIndex) -> Result<bool, AllocError> {
        self.check(slot)?;
        Ok(!self.get(self.leaf_index(slot)))
    }

    /// Verify every structural invariant: internal bits are the AND of their
    /// children, phantom leaves are used, the free counter matches the leaves,
    /// and the root is clear exactly when something is free.
    pub fn check_integrity(&self) -> bool {
        let first_leaf = self.n_leaves - 1;
        let internal_ok = (0..first_leaf).all(|i| self.get(i) == (self.get(2 * i + 1) && self.get(2 * i + 2)));
        let phantoms_ok = (self.capacity..self.n_leaves).all(|s| self.get(first_leaf + s));
        let free = (0..self.capacity).filter(|&s| !self.get(first_leaf + s)).count();
        internal_ok && phantoms_ok && free == self.free_count && self.get(0) == (free == 0)
    }

    #[cfg(test)]
    pub(crate) fn flip_bit(&mut self, index: usize) {
        let v = self.get(index);
        self.set(index, !v);
    }
}

#[inline]
fn sibling(node: usize) -> usize {
    if node % 2 == 1 {
        node + 1
    } else {
        node - 1
    }
}

/// Ancestor of `node` (at `node_depth`) sitting at `level`.
#[inline]
fn ancestor_at(node: usize, node_depth: u32, level: u32) -> usize {
    ((node + 1) >> (node_depth - level)) - 1
}

impl fmt::Debug for BitTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.bit_len())
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        f.debug_struct("BitTree")
            .field("capacity", &self.capacity)
            .field("n_leaves", &self.n_leaves)
            .field("free_count", &self.free_count)
            .field("bits", &bits)
            .finish()
    }
}

impl AllocatorPolicy for BitTree {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Bitmap
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn free_count(&self) -> usize {
        self.free_count
    }

    fn allocate(&mut self) -> Result<SlotIndex, AllocError> {
        BitTree::allocate(self)
    }

    fn allocate_near(&mut self, hint: SlotIndex) -> Result<SlotIndex, AllocError> {
        self.allocate_with_hint(hint)
    }

    fn release(&mut self, slot: SlotIndex) -> Result<(), AllocError> {
        BitTree::release(self, slot)
    }

    fn is_slot_free(&self, slot: SlotIndex) -> Result<bool, AllocError> {
        BitTree::is_slot_free(self, slot)
    }
}
