//! Plain-Rust state behind the browser bindings, kept separate so it can be
//! tested natively.

use bitfit::workload::{rng_for, run_random_churn, trace_list_lifecycle, ChurnParams, LifecycleParams};
use bitfit::{AllocError, BitTree, LocalityReport, PolicyKind, SlotIndex};
use rand::seq::SliceRandom;
use serde::Serialize;

/// Largest tree the page will draw.
pub const MAX_DEMO_SLOTS: usize = 64;

/// An interactive tree plus what the last operation touched.
pub struct TreeState {
    tree: BitTree,
    changed: Vec<usize>,
    last_slot: Option<usize>,
    last_steps: u64,
}

impl TreeState {
    pub fn new(capacity: usize) -> Result<Self, String> {
        if capacity > MAX_DEMO_SLOTS {
            return Err(format!("at most {MAX_DEMO_SLOTS} slots can be drawn"));
        }
        Ok(TreeState {
            tree: BitTree::new(capacity).map_err(|e| e.to_string())?,
            changed: Vec::new(),
            last_slot: None,
            last_steps: 0,
        })
    }

    pub fn tree(&self) -> &BitTree {
        &self.tree
    }

    /// Level-order indices whose bit changed in the last operation.
    pub fn changed(&self) -> &[usize] {
        &self.changed
    }

    pub fn last_slot(&self) -> Option<usize> {
        self.last_slot
    }

    /// Tree-node reads and writes spent by the last operation.
    pub fn last_steps(&self) -> u64 {
        self.last_steps
    }

    fn record<T>(&mut self, op: impl FnOnce(&mut BitTree) -> Result<T, AllocError>) -> Result<T, String> {
        let before = self.tree.bits();
        let steps = self.tree.op_steps();
        let out = op(&mut self.tree).map_err(|e| e.to_string())?;
        let after = self.tree.bits();
        self.changed = (0..after.len()).filter(|&i| before[i] != after[i]).collect();
        self.last_steps = self.tree.op_steps() - steps;
        Ok(out)
    }

    pub fn allocate(&mut self) -> Result<usize, String> {
        let s = self.record(|t| t.allocate())?.get();
        self.last_slot = Some(s);
        Ok(s)
    }

    pub fn allocate_near(&mut self, hint: usize) -> Result<usize, String> {
        let s = self.record(|t| t.allocate_with_hint(SlotIndex(hint)))?.get();
        self.last_slot = Some(s);
        Ok(s)
    }

    pub fn release(&mut self, slot: usize) -> Result<(), String> {
        self.record(|t| t.release(SlotIndex(slot)))?;
        self.last_slot = Some(slot);
        Ok(())
    }

    /// Replace the state with a random occupancy of roughly `fill`.
    pub fn scatter(&mut self, fill: f64, seed: u64) -> Result<(), String> {
        let cap = self.tree.capacity();
        let used = ((cap as f64 * fill.clamp(0.0, 1.0)).round() as usize).min(cap);
        let mut slots: Vec<usize> = (0..cap).collect();
        slots.shuffle(&mut rng_for(seed));
        let mut occ = vec![false; cap];
        for &s in &slots[..used] {
            occ[s] = true;
        }
        self.tree = BitTree::from_occupancy(&occ).map_err(|e| e.to_string())?;
        self.changed.clear();
        self.last_slot = None;
        self.last_steps = 0;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct LifecycleView {
    pub policy: PolicyKind,
    pub first: LocalityReport,
    pub second: LocalityReport,
    /// Slot of each node in second-traversal order.
    pub second_slots: Vec<usize>,
}

pub fn lifecycle_view(policy: &str, node_count: usize, slot_size: usize, seed: u64) -> Result<LifecycleView, String> {
    let kind: PolicyKind = policy
        .parse()
        .map_err(|e: bitfit::ParsePolicyKindError| e.to_string())?;
    let run =
        trace_list_lifecycle(kind, LifecycleParams::new(node_count, slot_size, seed)).map_err(|e| e.to_string())?;
    Ok(LifecycleView {
        policy: kind,
        first: run.report.first_traversal,
        second: run.report.second_traversal,
        second_slots: run.second_offsets.iter().map(|o| o.get() / slot_size).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct ChurnRow {
    pub policy: PolicyKind,
    pub batch: LocalityReport,
}

/// Churn batch metrics for every policy on the same schedule.
pub fn churn_table(capacity: usize, fill: f64, ops: usize, seed: u64) -> Result<Vec<ChurnRow>, String> {
    let params = ChurnParams::new(capacity, fill, ops, seed);
    PolicyKind::ALL
        .into_iter()
        .map(|policy| {
            run_random_churn(policy, params)
                .map(|batch| ChurnRow { policy, batch })
                .map_err(|e| e.to_string())
        })
        .collect()
}
