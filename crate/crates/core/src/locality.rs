//! Address-geometry proxies for cache behaviour of a traversal.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::pool::Offset;

pub const DEFAULT_LINE_SIZE: usize = 64;

/// Locality metrics for one ordered sequence of object offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub sequential_fraction: f64,
    pub distinct_lines: usize,
    pub mean_abs_gap: f64,
    pub traversal_len: usize,
}

impl LocalityReport {
    pub fn from_offsets(offsets: &[Offset], slot_size: usize, line_size: usize) -> Self {
        LocalityReport {
            sequential_fraction: sequential_fraction(offsets, slot_size),
            distinct_lines: distinct_lines(offsets, line_size),
            mean_abs_gap: mean_abs_gap(offsets),
            traversal_len: offsets.len(),
        }
    }
}

/// Share of consecutive pairs where the next object sits exactly one slot
/// after the previous one. Sequences shorter than two count as fully sequential.
pub fn sequential_fraction(offsets: &[Offset], slot_size: usize) -> f64 {
    if offsets.len() < 2 {
        return 1.0;
    }
    let hits = offsets
        .windows(2)
        .filter(|w| w[1].get() == w[0].get() + slot_size)
        .count();
    hits as f64 / (offsets.len() - 1) as f64
}

/// Number of distinct `line_size`-byte lines touched.
pub fn distinct_lines(offsets: &[Offset], line_size: usize) -> usize {
    assert!(line_size >= 1, "line size must be positive");
    offsets
        .iter()
        .map(|o| o.get() / line_size)
        .collect::<HashSet<_>>()
        .len()
}

/// Mean absolute distance in bytes between consecutive offsets; 0 for fewer than two.
pub fn mean_abs_gap(offsets: &[Offset]) -> f64 {
    if offsets.len() < 2 {
        return 0.0;
    }
    let total: u128 = offsets
        .windows(2)
        .map(|w| w[0].get().abs_diff(w[1].get()) as u128)
        .sum();
    total as f64 / (offsets.len() - 1) as f64
}
