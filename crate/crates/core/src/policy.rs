use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{FreeListOrder, FreeListPolicy, LinearBitmapPolicy};
use crate::bitmap_tree::{BitTree, SlotIndex};
use crate::error::AllocError;

/// Slot-level allocator contract shared by the bitmap tree and the baselines.
///
/// All policies agree on legality (which calls succeed and which error); they
/// differ only in which free slot they hand out.
pub trait AllocatorPolicy {
    fn kind(&self) -> PolicyKind;

    fn capacity(&self) -> usize;

    fn free_count(&self) -> usize;

    fn allocate(&mut self) -> Result<SlotIndex, AllocError>;

    /// Allocate somewhere near `hint`. Policies without a notion of placement
    /// validate the hint and then behave exactly like [`allocate`](Self::allocate).
    fn allocate_near(&mut self, hint: SlotIndex) -> Result<SlotIndex, AllocError> {
        self.check_slot(hint)?;
        self.allocate()
    }

    fn release(&mut self, slot: SlotIndex) -> Result<(), AllocError>;

    fn is_slot_free(&self, slot: SlotIndex) -> Result<bool, AllocError>;

    fn check_slot(&self, slot: SlotIndex) -> Result<(), AllocError> {
        if slot.get() < self.capacity() {
            Ok(())
        } else {
            Err(AllocError::OutOfRange {
                slot: slot.get(),
                capacity: self.capacity(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Bitmap,
    FreelistLifo,
    FreelistFifo,
    LinearBitmap,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Bitmap,
        PolicyKind::FreelistLifo,
        PolicyKind::FreelistFifo,
        PolicyKind::LinearBitmap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Bitmap => "bitmap",
            PolicyKind::FreelistLifo => "freelist-lifo",
            PolicyKind::FreelistFifo => "freelist-fifo",
            PolicyKind::LinearBitmap => "linear-bitmap",
        }
    }

    /// Build a fresh policy instance with every slot free.
    pub fn build(self, capacity: usize) -> Result<Box<dyn AllocatorPolicy + Send>, AllocError> {
        Ok(match self {
            PolicyKind::Bitmap => Box::new(BitTree::new(capacity)?),
            PolicyKind::FreelistLifo => Box::new(FreeListPolicy::new(capacity, FreeListOrder::Lifo)?),
            PolicyKind::FreelistFifo => Box::new(FreeListPolicy::new(capacity, FreeListOrder::Fifo)?),
            PolicyKind::LinearBitmap => Box::new(LinearBitmapPolicy::new(capacity)?),
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown allocator `{0}` (expected bitmap, freelist-lifo, freelist-fifo or linear-bitmap)")]
pub struct ParsePolicyKindError(String);

impl FromStr for PolicyKind {
    type Err = ParsePolicyKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ParsePolicyKindError(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.as_str().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("buddy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn every_kind_builds_an_empty_policy() {
        for kind in PolicyKind::ALL {
            let p = kind.build(5).unwrap();
            assert_eq!(p.kind(), kind);
            assert_eq!(p.capacity(), 5);
            assert_eq!(p.free_count(), 5);
            assert!(kind.build(0).is_err());
        }
    }
}
