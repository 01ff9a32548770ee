//! A fixed-size object allocator that keeps live objects packed toward low
//! addresses no matter what order they were freed in.
//!
//! The core structure is [`BitTree`]: one occupancy bit per slot stored as the
//! leaves of a complete binary tree, where every internal bit is the AND of its
//! two children. A zero root means "something is free", and a zero child tells
//! the descent which way to go, so allocate, release and hinted allocate all
//! touch a single root-to-leaf path.
//!
//! Around it sit the comparison policies ([`FreeListPolicy`],
//! [`LinearBitmapPolicy`]), an address-arithmetic [`Pool`], the linked-list
//! lifecycle and churn workloads with their locality metrics, and a small text
//! trace format for replaying allocation sequences.

mod baselines;
mod bitmap_tree;
mod error;
pub mod locality;
mod policy;
mod pool;
pub mod trace;
pub mod workload;

pub use baselines::{FreeListOrder, FreeListPolicy, LinearBitmapPolicy};
pub use bitmap_tree::{BitTree, SlotIndex};
pub use error::AllocError;
pub use locality::LocalityReport;
pub use policy::{AllocatorPolicy, ParsePolicyKindError, PolicyKind};
pub use pool::{Offset, Pool};
