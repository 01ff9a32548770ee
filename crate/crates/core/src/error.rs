use thiserror::Error;

/// Errors returned by every allocator policy and by [`Pool`](crate::Pool).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AllocError {
    #[error("pool exhausted")]
    PoolExhausted,
    #[error("double free of slot {0}")]
    DoubleFree(usize),
    #[error("slot {slot} out of range (capacity {capacity})")]
    OutOfRange { slot: usize, capacity: usize },
    #[error("offset {offset} out of range (pool spans {span} bytes)")]
    OffsetOutOfRange { offset: usize, span: usize },
    #[error("offset {offset} is not a multiple of slot size {slot_size}")]
    Misaligned { offset: usize, slot_size: usize },
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("slot size must be at least 1")]
    ZeroSlotSize,
    #[error("capacity {0} is too large")]
    CapacityTooLarge(usize),
}
