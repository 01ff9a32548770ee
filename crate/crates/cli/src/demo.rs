//! Annotated walkthrough of the three basic operations on an 8-slot tree.

use std::fmt::Write;

use bitfit::{BitTree, SlotIndex};
use serde::Serialize;

use crate::output;
use crate::{DemoArgs, Format};

#[derive(Debug, Serialize)]
pub struct DemoStep {
    pub title: String,
    pub operation: String,
    /// Slot returned or freed.
    pub slot: usize,
    pub leaf_bit: usize,
    pub before: Vec<u8>,
    pub after: Vec<u8>,
    pub changed: Vec<usize>,
    /// Nodes from root to the leaf that was reached or freed.
    pub path: Vec<usize>,
    /// For frees, the first ancestor found already clear.
    pub stopped_at: Option<usize>,
    pub steps: u64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename = "demo")]
struct DemoReport {
    capacity: usize,
    steps: Vec<DemoStep>,
}

fn bytes(tree: &BitTree) -> Vec<u8> {
    tree.bits().into_iter().map(u8::from).collect()
}

fn root_path(leaf: usize) -> Vec<usize> {
    let mut path = vec![leaf];
    let mut node = leaf;
    while node > 0 {
        node = (node - 1) / 2;
        path.push(node);
    }
    path.reverse();
    path
}

fn step(tree: &mut BitTree, title: &str, operation: String, op: impl FnOnce(&mut BitTree) -> SlotIndex) -> DemoStep {
    let before = bytes(tree);
    let steps_before = tree.op_steps();
    let slot = op(tree);
    let after = bytes(tree);
    let changed: Vec<usize> = (0..after.len()).filter(|&i| before[i] != after[i]).collect();
    let leaf_bit = tree.leaf_index(slot);
    let freed = after[leaf_bit] == 0;
    let stopped_at = if freed {
        changed.first().filter(|&&top| top > 0).map(|&top| (top - 1) / 2)
    } else {
        None
    };
    DemoStep {
        title: title.to_string(),
        operation,
        slot: slot.get(),
        leaf_bit,
        before,
        after,
        changed,
        path: root_path(leaf_bit),
        stopped_at,
        steps: tree.op_steps() - steps_before,
    }
}

pub fn walkthrough() -> Vec<DemoStep> {
    let mut steps = Vec::new();

    let mut tree = BitTree::new(8).expect("8 slots");
    steps.push(step(&mut tree, "allocate on an empty tree", "allocate()".into(), |t| {
        t.allocate().expect("free slot")
    }));

    let mut tree = BitTree::new(8).expect("8 slots");
    for _ in 0..6 {
        tree.allocate().expect("free slot");
    }
    steps.push(step(
        &mut tree,
        "free the 6th slot with slots 0-5 in use",
        "release(5)".into(),
        |t| {
            t.release(SlotIndex(5)).expect("slot 5 is in use");
            SlotIndex(5)
        },
    ));

    let mut tree = BitTree::new(8).expect("8 slots");
    for _ in 0..8 {
        tree.allocate().expect("free slot");
    }
    for s in 0..4 {
        tree.release(SlotIndex(s)).expect("in use");
    }
    let hint = SlotIndex(4);
    let title = format!(
        "hinted allocate toward leaf {} with slots 4-7 in use",
        tree.leaf_index(hint)
    );
    steps.push(step(&mut tree, &title, format!("allocate_with_hint({hint})"), |t| {
        t.allocate_with_hint(hint).expect("free slot")
    }));

    steps
}

fn render_tree(out: &mut String, bits: &[u8], marked: &[usize]) {
    let mut level_start = 0;
    let mut width = 1;
    let mut level = 0;
    while level_start < bits.len() {
        let cells: Vec<String> = (level_start..level_start + width)
            .map(|i| {
                let mark = if marked.contains(&i) { '*' } else { ' ' };
                format!("[{i:>2}]{}{mark}", bits[i])
            })
            .collect();
        writeln!(out, "    L{level}  {}", cells.join(" ").trim_end()).unwrap();
        level_start += width;
        width *= 2;
        level += 1;
    }
}

fn join(v: &[usize], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn text(steps: &[DemoStep]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "8-slot tree: 15 bits, node i has children 2i+1 and 2i+2, leaves are bits 7-14"
    )
    .unwrap();
    writeln!(
        out,
        "bit value 0 = free below, 1 = full; * marks bits changed by the step"
    )
    .unwrap();
    for (n, s) in steps.iter().enumerate() {
        writeln!(out).unwrap();
        writeln!(out, "step {}: {}", n + 1, s.title).unwrap();
        writeln!(out, "  {}", s.operation).unwrap();
        writeln!(out, "  before:").unwrap();
        render_tree(&mut out, &s.before, &[]);
        writeln!(out, "  after:").unwrap();
        render_tree(&mut out, &s.after, &s.changed);
        writeln!(out, "  path: {}", join(&s.path, " -> ")).unwrap();
        let mut changed = s.changed.clone();
        changed.reverse();
        writeln!(out, "  changed bits: {}", join(&changed, ", ")).unwrap();
        if let Some(stop) = s.stopped_at {
            writeln!(out, "  stopped at bit {stop} (already 0)").unwrap();
        }
        writeln!(
            out,
            "  slot {} (leaf bit {}), {} node visits",
            s.slot, s.leaf_bit, s.steps
        )
        .unwrap();
    }
    out
}

pub fn run(args: &DemoArgs) -> anyhow::Result<String> {
    let steps = walkthrough();
    match args.format {
        Format::Text => Ok(text(&steps)),
        Format::Json => output::json("demo", args, &[DemoReport { capacity: 8, steps }], false),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                step: usize,
                operation: &'a str,
                slot: usize,
                leaf_bit: usize,
                before: String,
                after: String,
                changed: String,
            }
            let bitstr = |b: &[u8]| b.iter().map(|x| char::from(b'0' + x)).collect::<String>();
            let rows: Vec<Row> = steps
                .iter()
                .enumerate()
                .map(|(i, s)| Row {
                    step: i + 1,
                    operation: &s.operation,
                    slot: s.slot,
                    leaf_bit: s.leaf_bit,
                    before: bitstr(&s.before),
                    after: bitstr(&s.after),
                    changed: join(&s.changed, " "),
                })
                .collect();
            output::csv(&rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_sets_leaf_seven_only() {
        let s = &walkthrough()[0];
        assert_eq!((s.slot, s.leaf_bit), (0, 7));
        assert_eq!(s.changed, vec![7]);
        assert_eq!(s.path, vec![0, 1, 3, 7]);
    }

    #[test]
    fn free_step_clears_twelve_and_five_then_stops_at_two() {
        let s = &walkthrough()[1];
        assert_eq!(s.leaf_bit, 12);
        assert_eq!(s.changed, vec![5, 12]);
        assert_eq!(s.stopped_at, Some(2));
        assert_eq!(s.path, vec![0, 2, 5, 12]);
    }

    #[test]
    fn hint_step_reaches_leaf_ten() {
        let s = &walkthrough()[2];
        assert_eq!(s.leaf_bit, 10);
        assert_eq!(s.path, vec![0, 1, 4, 10]);
        assert_eq!(s.before[2], 1);
    }
}
