//! Comparison policies.
//!
//! [`FreeListPolicy`] models the usual single-size arena: freed slots are kept
//! in the order they came back and reused from the head (FIFO) or tail (LIFO),
//! with untouched slots handed out bump-style in address order. Over time the
//! reuse order follows the free order, which is how addresses get scrambled.
//!
//! [`LinearBitmapPolicy`] is a flat bitmap scanned word by word for the first
//! zero bit. It always picks the same slot as [`BitTree`](crate::BitTree) and
//! serves as its oracle.

use std::collections::VecDeque;

use crate::bitmap_tree::SlotIndex;
use crate::error::AllocError;
use crate::policy::{AllocatorPolicy, PolicyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeListOrder {
    /// Most recently freed slot is reused first.
    Lifo,
    /// Least recently freed slot is reused first.
    Fifo,
}

#[derive(Debug, Clone)]
pub struct FreeListPolicy {
    order: FreeListOrder,
    capacity: usize,
    free_sequence: VecDeque<usize>,
    next_fresh: usize,
    live: Vec<bool>,
}

impl FreeListPolicy {
    pub fn new(capacity: usize, order: FreeListOrder) -> Result<Self, AllocError> {
        if capacity == 0 {
            return Err(AllocError::ZeroCapacity);
        }
        Ok(FreeListPolicy {
            order,
            capacity,
            free_sequence: VecDeque::new(),
            next_fresh: 0,
            live: vec![false; capacity],
        })
    }

    pub fn order(&self) -> FreeListOrder {
        self.order
    }

    /// Freed slots in the order they were returned.
    pub fn free_sequence(&self) -> impl Iterator<Item = SlotIndex> + '_ {
        self.free_sequence.iter().map(|&s| SlotIndex(s))
    }
}

impl AllocatorPolicy for FreeListPolicy {
    fn kind(&self) -> PolicyKind {
        match self.order {
            FreeListOrder::Lifo => PolicyKind::FreelistLifo,
            FreeListOrder::Fifo => PolicyKind::FreelistFifo,
        }
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn free_count(&self) -> usize {
        self.free_sequence.len() + (self.capacity - self.next_fresh)
    }

    fn allocate(&mut self) -> Result<SlotIndex, AllocError> {
        let reused = match self.order {
            FreeListOrder::Lifo => self.free_sequence.pop_back(),
            FreeListOrder::Fifo => self.free_sequence.pop_front(),
        };
        let slot = match reused {
            Some(s) => s,
            None if self.next_fresh < self.capacity => {
                self.next_fresh += 1;
                self.next_fresh - 1
            }
            None => return Err(AllocError::PoolExhausted),
        };
        self.live[slot] = true;
        Ok(SlotIndex(slot))
    }

    fn release(&mut self, slot: SlotIndex) -> Result<(), AllocError> {
        self.check_slot(slot)?;
        let s = slot.get();
        if !self.live[s] {
            return Err(AllocError::DoubleFree(s));
        }
        self.live[s] = false;
        self.free_sequence.push_back(s);
        Ok(())
    }

    fn is_slot_free(&self, slot: SlotIndex) -> Result<bool, AllocError> {
        self.check_slot(slot)?;
        Ok(!self.live[slot.get()])
    }
}

const WORD_BITS: usize = u64::BITS as usize;

#[derive(Debug, Clone)]
pub struct LinearBitmapPolicy {
    capacity: usize,
    words: Vec<u64>,
    free_count: usize,
}

impl LinearBitmapPolicy {
    pub fn new(capacity: usize) -> Result<Self, AllocError> {
        if capacity == 0 {
            return Err(AllocError::ZeroCapacity);
        }
        Ok(LinearBitmapPolicy {
            capacity,
            words: vec![0; capacity.div_ceil(WORD_BITS)],
            free_count: capacity,
        })
    }

    pub fn from_occupancy(used: &[bool]) -> Result<Self, AllocError> {
        let mut p = Self::new(used.len())?;
        for (s, _) in used.iter().enumerate().filter(|(_, u)| **u) {
            p.words[s / WORD_BITS] |= 1 << (s % WORD_BITS);
            p.free_count -= 1;
        }
        Ok(p)
    }

    fn is_used(&self, s: usize) -> bool {
        (self.words[s / WORD_BITS] >> (s % WORD_BITS)) & 1 == 1
    }
}

impl AllocatorPolicy for LinearBitmapPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::LinearBitmap
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn free_count(&self) -> usize {
        self.free_count
    }

    fn allocate(&mut self) -> Result<SlotIndex, AllocError> {
        for (w, word) in self.words.iter_mut().enumerate() {
            if *word == u64::MAX {
                continue;
            }
            let s = w * WORD_BITS + word.trailing_ones() as usize;
            if s >= self.capacity {
                break;
            }
            *word |= 1 << (s % WORD_BITS);
            self.free_count -= 1;
            return Ok(SlotIndex(s));
        }
        Err(AllocError::PoolExhausted)
    }

    fn release(&mut self, slot: SlotIndex) -> Result<(), AllocError> {
        self.check_slot(slot)?;
        let s = slot.get();
        if !self.is_used(s) {
            return Err(AllocError::DoubleFree(s));
        }
        self.words[s / WORD_BITS] &= !(1 << (s % WORD_BITS));
        self.free_count += 1;
        Ok(())
    }

    fn is_slot_free(&self, slot: SlotIndex) -> Result<bool, AllocError> {
        self.check_slot(slot)?;
        Ok(!self.is_used(slot.get()))
    }
}
