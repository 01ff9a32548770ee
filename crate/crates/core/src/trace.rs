//! Text allocation traces.
//!
//! One event per line, tokens separated by a single space:
//!
//! ```text
//! # comment
//! alloc <id>
//! free <id>
//! alloc_hint <id> <hint_id>
//! ```
//!
//! Ids match `[A-Za-z0-9_]+`. Hints name a live object rather than a slot, so
//! the same trace replays under any policy.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitmap_tree::SlotIndex;
use crate::error::AllocError;
use crate::policy::PolicyKind;
use crate::pool::{Offset, Pool};
use crate::workload::{lifecycle_release_order, ChurnParams, ChurnScript, ChurnStep, WorkloadError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOp {
    Alloc,
    Free,
    AllocHint,
}

impl TraceOp {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceOp::Alloc => "alloc",
            TraceOp::Free => "free",
            TraceOp::AllocHint => "alloc_hint",
        }
    }
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub op: TraceOp,
    pub id: String,
    /// Set for [`TraceOp::AllocHint`] only.
    pub hint_id: Option<String>,
    /// 1-based source line; 0 for events built in code.
    pub line_no: usize,
}

impl TraceEvent {
    pub fn alloc(id: impl Into<String>) -> Self {
        Self::new(TraceOp::Alloc, id.into(), None)
    }

    pub fn free(id: impl Into<String>) -> Self {
        Self::new(TraceOp::Free, id.into(), None)
    }

    pub fn alloc_hint(id: impl Into<String>, hint_id: impl Into<String>) -> Self {
        Self::new(TraceOp::AllocHint, id.into(), Some(hint_id.into()))
    }

    fn new(op: TraceOp, id: String, hint_id: Option<String>) -> Self {
        TraceEvent {
            op,
            id,
            hint_id,
            line_no: 0,
        }
    }

    pub fn at_line(mut self, line_no: usize) -> Self {
        self.line_no = line_no;
        self
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.op, self.id)?;
        if let Some(h) = &self.hint_id {
            write!(f, " {h}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

fn is_id(tok: &str) -> bool {
    !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, SyntaxError> {
    let mut events = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| SyntaxError { line: line_no, message };
        let tokens: Vec<&str> = line.split(' ').collect();
        if let Some(bad) = tokens.iter().skip(1).find(|t| !is_id(t)) {
            return Err(err(format!("invalid id `{bad}`")));
        }
        let event = match tokens.as_slice() {
            ["alloc", id] => TraceEvent::alloc(*id),
            ["free", id] => TraceEvent::free(*id),
            ["alloc_hint", id, hint] => TraceEvent::alloc_hint(*id, *hint),
            [op @ ("alloc" | "free" | "alloc_hint"), ..] => {
                let want = if *op == "alloc_hint" { 2 } else { 1 };
                return Err(err(format!("`{op}` takes {want} id(s), got {}", tokens.len() - 1)));
            }
            [op, ..] => return Err(err(format!("unknown operation `{op}`"))),
            [] => unreachable!("split yields at least one token"),
        };
        events.push(event.at_line(line_no));
    }
    Ok(events)
}

/// Render events one per line, each terminated by a line feed.
pub fn print_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Placement of one `alloc` / `alloc_hint` event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub line: usize,
    pub op: TraceOp,
    pub id: String,
    pub slot: SlotIndex,
    pub offset: Offset,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayErrorKind {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("id `{0}` is already live")]
    DuplicateId(String),
    #[error("double free of id `{0}`")]
    DoubleFree(String),
    #[error(transparent)]
    Alloc(#[from] AllocError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("cannot create pool: {0}")]
    Setup(AllocError),
    #[error("line {line}: {kind}")]
    Event { line: usize, kind: ReplayErrorKind },
}

pub fn replay(
    events: &[TraceEvent],
    kind: PolicyKind,
    capacity: usize,
    slot_size: usize,
) -> Result<Vec<ReplayRecord>, ReplayError> {
    let mut pool = Pool::new(slot_size, capacity, kind).map_err(ReplayError::Setup)?;
    let mut live: HashMap<&str, Offset> = HashMap::new();
    let mut retired: HashSet<&str> = HashSet::new();
    let mut records = Vec::new();
    for e in events {
        let fail = |kind: ReplayErrorKind| ReplayError::Event { line: e.line_no, kind };
        let lookup = |live: &HashMap<&str, Offset>, id: &str| {
            live.get(id)
                .copied()
                .ok_or_else(|| fail(ReplayErrorKind::UnknownId(id.to_string())))
        };
        match e.op {
            TraceOp::Free => {
                if retired.contains(e.id.as_str()) {
                    return Err(fail(ReplayErrorKind::DoubleFree(e.id.clone())));
                }
                let off = lookup(&live, &e.id)?;
                pool.release(off).map_err(|a| fail(a.into()))?;
                live.remove(e.id.as_str());
                retired.insert(&e.id);
            }
            TraceOp::Alloc | TraceOp::AllocHint => {
                if live.contains_key(e.id.as_str()) {
                    return Err(fail(ReplayErrorKind::DuplicateId(e.id.clone())));
                }
                let off = match (&e.op, &e.hint_id) {
                    (TraceOp::AllocHint, Some(h)) => {
                        let hint = lookup(&live, h)?;
                        pool.acquire_near(hint)
                    }
                    _ => pool.acquire(),
                }
                .map_err(|a| fail(a.into()))?;
                retired.remove(e.id.as_str());
                live.insert(&e.id, off);
                records.push(ReplayRecord {
                    line: e.line_no,
                    op: e.op,
                    id: e.id.clone(),
                    slot: SlotIndex(off.get() / slot_size),
                    offset: off,
                });
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    /// Build `node_count` objects, free them in value-sorted order, rebuild.
    Lifecycle { node_count: usize },
    /// Initial fill, random churn around the fill level, then fill every
    /// remaining slot. `hint_ratio` of churn allocations become `alloc_hint`.
    Churn {
        capacity: usize,
        target_fill: f64,
        ops: usize,
        hint_ratio: f64,
    },
}

/// Emit a deterministic trace for `kind`. The text contains no comments or
/// blank lines, so `print_trace(parse_trace(t)) == t`.
pub fn generate_trace(kind: TraceKind, seed: u64) -> Result<String, WorkloadError> {
    let mut events = Vec::new();
    match kind {
        TraceKind::Lifecycle { node_count } => {
            events.extend((0..node_count).map(|i| TraceEvent::alloc(format!("a{i}"))));
            events.extend(
                lifecycle_release_order(node_count, seed)
                    .into_iter()
                    .map(|i| TraceEvent::free(format!("a{i}"))),
            );
            events.extend((0..node_count).map(|i| TraceEvent::alloc(format!("b{i}"))));
        }
        TraceKind::Churn {
            capacity,
            target_fill,
            ops,
            hint_ratio,
        } => {
            let mut params = ChurnParams::new(capacity, target_fill, ops, seed);
            params.hint_ratio = hint_ratio;
            let script = ChurnScript::generate(&params)?;
            let mut next = 0usize;
            let mut fresh = || {
                next += 1;
                format!("o{}", next - 1)
            };
            let mut live: Vec<String> = Vec::new();
            for _ in 0..script.initial {
                let id = fresh();
                events.push(TraceEvent::alloc(id.clone()));
                live.push(id);
            }
            for step in &script.steps {
                match *step {
                    ChurnStep::Acquire => {
                        let id = fresh();
                        events.push(TraceEvent::alloc(id.clone()));
                        live.push(id);
                    }
                    ChurnStep::AcquireNear(i) => {
                        let id = fresh();
                        events.push(TraceEvent::alloc_hint(id.clone(), live[i].clone()));
                        live.push(id);
                    }
                    ChurnStep::Release(i) => events.push(TraceEvent::free(live.swap_remove(i))),
                }
            }
            if ops > 0 {
                for _ in live.len()..capacity {
                    events.push(TraceEvent::alloc(fresh()));
                }
            }
        }
    }
    Ok(print_trace(&events))
}
