use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitmap_tree::SlotIndex;
use crate::error::AllocError;
use crate::policy::{AllocatorPolicy, PolicyKind};

/// Byte offset of an object from the start of its pool. Always a multiple of
/// the pool's slot size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offset(pub usize);

impl Offset {
    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A contiguous region of `capacity` objects of `slot_size` bytes each.
///
/// The region is modelled by arithmetic only: nothing is ever read from or
/// written to object memory, and all bookkeeping lives in the policy.
pub struct Pool {
    slot_size: usize,
    policy: Box<dyn AllocatorPolicy + Send>,
}

impl Pool {
    pub fn new(slot_size: usize, capacity: usize, kind: PolicyKind) -> Result<Self, AllocError> {
        if slot_size == 0 {
            return Err(AllocError::ZeroSlotSize);
        }
        capacity
            .checked_mul(slot_size)
            .ok_or(AllocError::CapacityTooLarge(capacity))?;
        Ok(Pool {
            slot_size,
            policy: kind.build(capacity)?,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.policy.kind()
    }

    pub fn slot_size(&self) -> usize {
        self.slot_size
    }

    pub fn capacity(&self) -> usize {
        self.policy.capacity()
    }

    pub fn free_count(&self) -> usize {
        self.policy.free_count()
    }

    /// Size of the region in bytes.
    pub fn span(&self) -> usize {
        self.capacity() * self.slot_size
    }

    pub fn offset_of(&self, slot: SlotIndex) -> Offset {
        Offset(slot.get() * self.slot_size)
    }

    pub fn slot_of(&self, offset: Offset) -> Result<SlotIndex, AllocError> {
        let off = offset.get();
        if off >= self.span() {
            return Err(AllocError::OffsetOutOfRange {
                offset: off,
                span: self.span(),
            });
        }
        if !off.is_multiple_of(self.slot_size) {
            return Err(AllocError::Misaligned {
                offset: off,
                slot_size: self.slot_size,
            });
        }
        Ok(SlotIndex(off / self.slot_size))
    }

    pub fn acquire(&mut self) -> Result<Offset, AllocError> {
        let slot = self.policy.allocate()?;
        Ok(self.offset_of(slot))
    }

    /// Acquire an object near `hint`. Only the bitmap policy uses the hint;
    /// the other policies validate it and fall back to [`acquire`](Self::acquire).
    pub fn acquire_near(&mut self, hint: Offset) -> Result<Offset, AllocError> {
        let hint = self.slot_of(hint)?;
        let slot = self.policy.allocate_near(hint)?;
        Ok(self.offset_of(slot))
    }

    pub fn release(&mut self, offset: Offset) -> Result<(), AllocError> {
        let slot = self.slot_of(offset)?;
        self.policy.release(slot)
    }

    pub fn is_free(&self, offset: Offset) -> Result<bool, AllocError> {
        let slot = self.slot_of(offset)?;
        self.policy.is_slot_free(slot)
    }

    /// Slot-level view, for callers that track slots rather than offsets.
    pub fn policy(&self) -> &dyn AllocatorPolicy {
        self.policy.as_ref()
    }

    pub fn policy_mut(&mut self) -> &mut dyn AllocatorPolicy {
        self.policy.as_mut()
    }
}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pool")
            .field("kind", &self.kind())
            .field("slot_size", &self.slot_size)
            .field("capacity", &self.capacity())
            .field("free_count", &self.free_count())
            .finish()
    }
}
