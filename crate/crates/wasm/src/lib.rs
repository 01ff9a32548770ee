//! Browser bindings for the allocator walkthrough page in `www/`.

mod view;

use wasm_bindgen::prelude::*;

pub use view::{churn_table, lifecycle_view, TreeState, MAX_DEMO_SLOTS};

fn js_err(msg: String) -> JsError {
    JsError::new(&msg)
}

#[wasm_bindgen]
pub struct TreeDemo {
    state: TreeState,
}

#[wasm_bindgen]
impl TreeDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(capacity: usize) -> Result<TreeDemo, JsError> {
        Ok(TreeDemo {
            state: TreeState::new(capacity).map_err(js_err)?,
        })
    }

    pub fn allocate(&mut self) -> Result<usize, JsError> {
        self.state.allocate().map_err(js_err)
    }

    #[wasm_bindgen(js_name = allocateNear)]
    pub fn allocate_near(&mut self, hint: usize) -> Result<usize, JsError> {
        self.state.allocate_near(hint).map_err(js_err)
    }

    pub fn release(&mut self, slot: usize) -> Result<(), JsError> {
        self.state.release(slot).map_err(js_err)
    }

    pub fn scatter(&mut self, fill: f64, seed: u64) -> Result<(), JsError> {
        self.state.scatter(fill, seed).map_err(js_err)
    }

    /// Level-order bits, one byte per node.
    pub fn bits(&self) -> Vec<u8> {
        self.state.tree().bits().into_iter().map(u8::from).collect()
    }

    pub fn changed(&self) -> Vec<u32> {
        self.state.changed().iter().map(|&i| i as u32).collect()
    }

    #[wasm_bindgen(js_name = lastSlot)]
    pub fn last_slot(&self) -> Option<usize> {
        self.state.last_slot()
    }

    #[wasm_bindgen(js_name = lastSteps)]
    pub fn last_steps(&self) -> u32 {
        self.state.last_steps() as u32
    }

    #[wasm_bindgen(getter)]
    pub fn capacity(&self) -> usize {
        self.state.tree().capacity()
    }

    #[wasm_bindgen(getter, js_name = nLeaves)]
    pub fn n_leaves(&self) -> usize {
        self.state.tree().n_leaves()
    }

    #[wasm_bindgen(getter, js_name = freeCount)]
    pub fn free_count(&self) -> usize {
        self.state.tree().free_count()
    }
}

/// Run the list lifecycle and return its report as JSON.
#[wasm_bindgen]
pub fn lifecycle(policy: &str, node_count: usize, slot_size: usize, seed: u64) -> Result<String, JsError> {
    let view = lifecycle_view(policy, node_count, slot_size, seed).map_err(js_err)?;
    serde_json::to_string(&view).map_err(|e| js_err(e.to_string()))
}

/// Run the churn workload under every policy and return the rows as JSON.
#[wasm_bindgen]
pub fn churn(capacity: usize, fill: f64, ops: usize, seed: u64) -> Result<String, JsError> {
    let rows = churn_table(capacity, fill, ops, seed).map_err(js_err)?;
    serde_json::to_string(&rows).map_err(|e| js_err(e.to_string()))
}
