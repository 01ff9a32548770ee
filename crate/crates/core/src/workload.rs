//! Allocation workloads measured through [`LocalityReport`]s.
//!
//! The lifecycle workload builds a linked list, walks it, sorts it by value,
//! frees every node in sorted order, rebuilds it and walks it again. Whatever
//! order the allocator hands slots back in becomes the second walk's address
//! order. The churn workload holds a pool near a fill level with random
//! acquires and releases, then measures a batch of fresh acquires.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::AllocError;
use crate::locality::{LocalityReport, DEFAULT_LINE_SIZE};
use crate::policy::PolicyKind;
use crate::pool::{Offset, Pool};

/// Name of the generator every seeded workload draws from.
pub const RNG_NAME: &str = "chacha8";

/// Node payloads are drawn uniformly from `0..=MAX_VALUE`.
pub const MAX_VALUE: u8 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("target fill {0} must lie strictly between 0 and 1")]
    InvalidFill(f64),
    #[error("hint ratio {0} must lie in [0, 1]")]
    InvalidHintRatio(f64),
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ListNode {
    offset: Offset,
    value: u8,
    next: Option<usize>,
}

/// Singly linked list whose nodes carry simulated addresses.
#[derive(Debug, Default)]
struct NodeList {
    nodes: Vec<ListNode>,
    head: Option<usize>,
    tail: Option<usize>,
}

impl NodeList {
    fn append(&mut self, offset: Offset, value: u8) {
        let idx = self.nodes.len();
        self.nodes.push(ListNode {
            offset,
            value,
            next: None,
        });
        match self.tail {
            Some(t) => self.nodes[t].next = Some(idx),
            None => self.head = Some(idx),
        }
        self.tail = Some(idx);
    }

    fn iter(&self) -> impl Iterator<Item = &ListNode> + '_ {
        std::iter::successors(self.head.map(|h| &self.nodes[h]), |n| n.next.map(|i| &self.nodes[i]))
    }

    fn offsets(&self) -> Vec<Offset> {
        self.iter().map(|n| n.offset).collect()
    }

    /// Stable sort by value: equal values keep their current list order.
    fn sort_by_value(&mut self) {
        let mut order: Vec<usize> = Vec::with_capacity(self.nodes.len());
        let mut cur = self.head;
        while let Some(i) = cur {
            order.push(i);
            cur = self.nodes[i].next;
        }
        order.sort_by_key(|&i| self.nodes[i].value);
        for pair in order.windows(2) {
            self.nodes[pair[0]].next = Some(pair[1]);
        }
        if let Some(&last) = order.last() {
            self.nodes[last].next = None;
        }
        self.head = order.first().copied();
        self.tail = order.last().copied();
    }

    /// Release every node head to tail and empty the list.
    fn clear(&mut self, pool: &mut Pool) -> Result<(), AllocError> {
        for node in self.iter() {
            pool.release(node.offset)?;
        }
        *self = NodeList::default();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleParams {
    pub node_count: usize,
    pub slot_size: usize,
    pub line_size: usize,
    pub seed: u64,
}

impl LifecycleParams {
    pub fn new(node_count: usize, slot_size: usize, seed: u64) -> Self {
        LifecycleParams {
            node_count,
            slot_size,
            line_size: DEFAULT_LINE_SIZE,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleReport {
    pub policy_kind: PolicyKind,
    pub node_count: usize,
    pub slot_size: usize,
    pub line_size: usize,
    pub seed: u64,
    pub rng: String,
    pub first_traversal: LocalityReport,
    pub second_traversal: LocalityReport,
}

/// Lifecycle report plus the raw traversal offsets behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleRun {
    pub report: LifecycleReport,
    pub first_offsets: Vec<Offset>,
    pub second_offsets: Vec<Offset>,
}

pub fn run_list_lifecycle(kind: PolicyKind, params: LifecycleParams) -> Result<LifecycleReport, WorkloadError> {
    trace_list_lifecycle(kind, params).map(|run| run.report)
}

pub fn trace_list_lifecycle(kind: PolicyKind, params: LifecycleParams) -> Result<LifecycleRun, WorkloadError> {
    let LifecycleParams {
        node_count,
        slot_size,
        line_size,
        seed,
    } = params;
    let mut pool = Pool::new(slot_size, node_count, kind)?;
    let mut rng = rng_for(seed);
    let mut list = NodeList::default();

    for _ in 0..node_count {
        let offset = pool.acquire()?;
        list.append(offset, rng.gen_range(0..=MAX_VALUE));
    }
    let first_offsets = list.offsets();

    list.sort_by_value();
    list.clear(&mut pool)?;

    for _ in 0..node_count {
        let offset = pool.acquire()?;
        list.append(offset, rng.gen_range(0..=MAX_VALUE));
    }
    let second_offsets = list.offsets();

    let report = LifecycleReport {
        policy_kind: kind,
        node_count,
        slot_size,
        line_size,
        seed,
        rng: RNG_NAME.to_string(),
        first_traversal: LocalityReport::from_offsets(&first_offsets, slot_size, line_size),
        second_traversal: LocalityReport::from_offsets(&second_offsets, slot_size, line_size),
    };
    Ok(LifecycleRun {
        report,
        first_offsets,
        second_offsets,
    })
}

/// Positions (in first-build order) of the nodes as the lifecycle frees them:
/// stably sorted by the values drawn for `seed`.
pub fn lifecycle_release_order(node_count: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_for(seed);
    let values: Vec<u8> = (0..node_count).map(|_| rng.gen_range(0..=MAX_VALUE)).collect();
    let mut order: Vec<usize> = (0..node_count).collect();
    order.sort_by_key(|&i| values[i]);
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChurnParams {
    pub capacity: usize,
    pub target_fill: f64,
    pub ops: usize,
    pub slot_size: usize,
    pub line_size: usize,
    pub seed: u64,
    /// Fraction of churn acquires issued as hinted acquires near a random live object.
    pub hint_ratio: f64,
}

impl ChurnParams {
    pub fn new(capacity: usize, target_fill: f64, ops: usize, seed: u64) -> Self {
        ChurnParams {
            capacity,
            target_fill,
            ops,
            slot_size: 32,
            line_size: DEFAULT_LINE_SIZE,
            seed,
            hint_ratio: 0.0,
        }
    }
}

/// One step of a churn run. Live objects are kept in a list that grows by
/// push and shrinks by `swap_remove`; indices refer to that list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChurnStep {
    Acquire,
    AcquireNear(usize),
    Release(usize),
}

/// A policy-independent churn schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ChurnScript {
    /// Acquires performed before churn begins.
    pub initial: usize,
    pub steps: Vec<ChurnStep>,
}

impl ChurnScript {
    pub fn generate(params: &ChurnParams) -> Result<Self, WorkloadError> {
        let fill = params.target_fill;
        if !(fill > 0.0 && fill < 1.0) {
            return Err(WorkloadError::InvalidFill(fill));
        }
        if !(0.0..=1.0).contains(&params.hint_ratio) {
            return Err(WorkloadError::InvalidHintRatio(params.hint_ratio));
        }
        if params.capacity == 0 {
            return Err(AllocError::ZeroCapacity.into());
        }
        let capacity = params.capacity;
        let target = ((capacity as f64 * fill).round() as usize).min(capacity);
        // random walk of the live count inside target ± band
        let band = (capacity / 32).max(1);
        let mut rng = rng_for(params.seed);
        let mut live = target;
        let mut steps = Vec::with_capacity(params.ops);
        for _ in 0..params.ops {
            let mut acquire = if live + band < target {
                true
            } else if live > target + band {
                false
            } else {
                rng.gen_bool(0.5)
            };
            if live == capacity {
                acquire = false;
            } else if live == 0 {
                acquire = true;
            }
            let step = if acquire {
                if live > 0 && params.hint_ratio > 0.0 && rng.gen_bool(params.hint_ratio) {
                    ChurnStep::AcquireNear(rng.gen_range(0..live))
                } else {
                    ChurnStep::Acquire
                }
            } else {
                ChurnStep::Release(rng.gen_range(0..live))
            };
            live = if acquire { live + 1 } else { live - 1 };
            steps.push(step);
        }
        Ok(ChurnScript { initial: target, steps })
    }
}

/// Drive a pool through a churn schedule and report on the final batch.
///
/// After the schedule, every remaining free slot is acquired and the report
/// covers those acquires in order. With `ops == 0` there is no churn and the
/// report covers the initial fill instead.
pub fn run_random_churn(kind: PolicyKind, params: ChurnParams) -> Result<LocalityReport, WorkloadError> {
    let script = ChurnScript::generate(&params)?;
    let mut pool = Pool::new(params.slot_size, params.capacity, kind)?;
    let mut live: Vec<Offset> = Vec::with_capacity(params.capacity);
    for _ in 0..script.initial {
        live.push(pool.acquire()?);
    }
    if params.ops == 0 {
        return Ok(LocalityReport::from_offsets(&live, params.slot_size, params.line_size));
    }
    for step in &script.steps {
        match *step {
            ChurnStep::Acquire => live.push(pool.acquire()?),
            ChurnStep::AcquireNear(i) => {
                let hint = live[i];
                live.push(pool.acquire_near(hint)?);
            }
            ChurnStep::Release(i) => pool.release(live.swap_remove(i))?,
        }
    }
    let mut batch = Vec::with_capacity(pool.free_count());
    while pool.free_count() > 0 {
        batch.push(pool.acquire()?);
    }
    Ok(LocalityReport::from_offsets(&batch, params.slot_size, params.line_size))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: the rebuild after a full drain hands out 0, s, 2s, ...
    fn packed(n: usize, slot: usize) -> Vec<Offset> {
        (0..n).map(|i| Offset(i * slot)).collect()
    }

    #[test]
    fn node_list_sort_is_stable_and_relinks() {
        let mut l = NodeList::default();
        for (i, v) in [5u8, 1, 5, 0, 1].into_iter().enumerate() {
            l.append(Offset(i * 8), v);
        }
        l.sort_by_value();
        assert_eq!(
            l.offsets(),
            vec![Offset(24), Offset(8), Offset(32), Offset(0), Offset(16)]
        );
        assert_eq!(l.iter().count(), 5);
    }

    #[test]
    fn bitmap_rebuild_is_packed_for_any_seed() {
        for seed in 0..5 {
            let run = trace_list_lifecycle(PolicyKind::Bitmap, LifecycleParams::new(500, 32, seed)).unwrap();
            assert_eq!(run.second_offsets, packed(500, 32));
            assert_eq!(run.report.second_traversal.sequential_fraction, 1.0);
            assert_eq!(run.report.first_traversal.sequential_fraction, 1.0);
        }
    }

    #[test]
    fn first_use_is_in_address_order_for_every_policy() {
        for kind in PolicyKind::ALL {
            let run = trace_list_lifecycle(kind, LifecycleParams::new(300, 16, 9)).unwrap();
            assert_eq!(run.first_offsets, packed(300, 16));
        }
    }

    #[test]
    fn lifo_rebuild_is_reverse_of_sorted_free_order() {
        let n = 1000;
        let run = trace_list_lifecycle(PolicyKind::FreelistLifo, LifecycleParams::new(n, 32, 3)).unwrap();
        // simulate the stack: push in sorted order, pop everything
        let mut want: Vec<Offset> = lifecycle_release_order(n, 3)
            .into_iter()
            .map(|i| Offset(i * 32))
            .collect();
        want.reverse();
        assert_eq!(run.second_offsets, want);
        assert!(run.report.second_traversal.sequential_fraction < 0.05);
    }

    #[test]
    fn fifo_rebuild_follows_sorted_free_order() {
        let n = 800;
        let run = trace_list_lifecycle(PolicyKind::FreelistFifo, LifecycleParams::new(n, 32, 4)).unwrap();
        let want: Vec<Offset> = lifecycle_release_order(n, 4)
            .into_iter()
            .map(|i| Offset(i * 32))
            .collect();
        assert_eq!(run.second_offsets, want);
    }

    #[test]
    fn single_node_lifecycle_is_trivially_sequential() {
        for kind in PolicyKind::ALL {
            let r = run_list_lifecycle(kind, LifecycleParams::new(1, 32, 0)).unwrap();
            assert_eq!(r.first_traversal.sequential_fraction, 1.0);
            assert_eq!(r.second_traversal.sequential_fraction, 1.0);
            assert_eq!(r.second_traversal.traversal_len, 1);
        }
    }

    #[test]
    fn lifecycle_is_deterministic() {
        for kind in PolicyKind::ALL {
            let p = LifecycleParams::new(400, 24, 77);
            assert_eq!(
                run_list_lifecycle(kind, p).unwrap(),
                run_list_lifecycle(kind, p).unwrap()
            );
        }
    }

    #[test]
    fn zero_nodes_is_an_error() {
        assert_eq!(
            run_list_lifecycle(PolicyKind::Bitmap, LifecycleParams::new(0, 32, 0)),
            Err(WorkloadError::Alloc(AllocError::ZeroCapacity))
        );
    }

    #[test]
    fn churn_rejects_bad_fill() {
        for fill in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                run_random_churn(PolicyKind::Bitmap, ChurnParams::new(64, fill, 10, 0)),
                Err(WorkloadError::InvalidFill(_))
            ));
        }
    }

    #[test]
    fn churn_without_ops_reports_initial_fill() {
        let r = run_random_churn(PolicyKind::FreelistLifo, ChurnParams::new(100, 0.7, 0, 5)).unwrap();
        assert_eq!(r.traversal_len, 70);
        assert_eq!(r.sequential_fraction, 1.0);
    }

    #[test]
    fn churn_near_empty_bitmap_batch_is_packed() {
        // tiny fill: the live set collapses toward the low slots and the batch
        // fills everything else in ascending order
        let r = run_random_churn(PolicyKind::Bitmap, ChurnParams::new(256, 0.001, 2, 1)).unwrap();
        assert!(r.traversal_len >= 254);
        let fresh = run_random_churn(PolicyKind::Bitmap, ChurnParams::new(64, 0.5, 0, 1)).unwrap();
        assert_eq!(fresh.sequential_fraction, 1.0);
    }

    #[test]
    fn churn_batch_is_tighter_under_bitmap_than_lifo() {
        for seed in 0..5 {
            let p = ChurnParams::new(1024, 0.7, 5000, seed);
            let bitmap = run_random_churn(PolicyKind::Bitmap, p).unwrap();
            let lifo = run_random_churn(PolicyKind::FreelistLifo, p).unwrap();
            assert_eq!(bitmap.traversal_len, lifo.traversal_len);
            assert!(bitmap.mean_abs_gap <= lifo.mean_abs_gap, "{bitmap:?} vs {lifo:?}");
        }
    }

    #[test]
    fn churn_holds_fill_near_target() {
        let p = ChurnParams::new(1000, 0.6, 20_000, 2);
        let script = ChurnScript::generate(&p).unwrap();
        let band = 1000 / 32;
        let mut live = script.initial as i64;
        for step in &script.steps {
            match step {
                ChurnStep::Release(i) => {
                    assert!((*i as i64) < live);
                    live -= 1;
                }
                _ => live += 1,
            }
            assert!((live - 600).abs() <= band as i64 + 1);
        }
    }

    #[test]
    fn hinted_churn_runs_on_every_policy() {
        let mut p = ChurnParams::new(200, 0.75, 2000, 8);
        p.hint_ratio = 0.5;
        let script = ChurnScript::generate(&p).unwrap();
        assert!(script.steps.iter().any(|s| matches!(s, ChurnStep::AcquireNear(_))));
        for kind in PolicyKind::ALL {
            run_random_churn(kind, p).unwrap();
        }
    }
}
