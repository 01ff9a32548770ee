use std::fmt::Write;

use bitfit::workload::{run_list_lifecycle, run_random_churn, ChurnParams, LifecycleParams, LifecycleReport, RNG_NAME};
use bitfit::{LocalityReport, PolicyKind};
use serde::Serialize;

use crate::output;
use crate::{BenchArgs, Format, Workload};

#[derive(Debug, Serialize)]
pub struct ChurnReport {
    pub policy_kind: PolicyKind,
    pub capacity: usize,
    pub slot_size: usize,
    pub line_size: usize,
    pub target_fill: f64,
    pub ops: usize,
    pub seed: u64,
    pub rng: String,
    pub batch: LocalityReport,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchReport {
    Lifecycle(LifecycleReport),
    Churn(ChurnReport),
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    workload: &'a str,
    allocator: PolicyKind,
    traversal: &'a str,
    slots: usize,
    slot_size: usize,
    line_size: usize,
    seed: u64,
    sequential_fraction: f64,
    distinct_lines: usize,
    mean_abs_gap: f64,
    traversal_len: usize,
}

pub fn run(args: &BenchArgs) -> anyhow::Result<String> {
    let pool = &args.pool;
    let report = match args.workload {
        Workload::Lifecycle => {
            let params = LifecycleParams {
                node_count: pool.slots,
                slot_size: pool.slot_size,
                line_size: args.line_size,
                seed: args.seed,
            };
            BenchReport::Lifecycle(run_list_lifecycle(pool.allocator, params)?)
        }
        Workload::Churn => {
            let mut params = ChurnParams::new(pool.slots, args.fill, args.ops, args.seed);
            params.slot_size = pool.slot_size;
            params.line_size = args.line_size;
            let batch = run_random_churn(pool.allocator, params)?;
            BenchReport::Churn(ChurnReport {
                policy_kind: pool.allocator,
                capacity: pool.slots,
                slot_size: pool.slot_size,
                line_size: args.line_size,
                target_fill: args.fill,
                ops: args.ops,
                seed: args.seed,
                rng: RNG_NAME.to_string(),
                batch,
            })
        }
    };
    match pool.format {
        Format::Json => output::json("bench", args, &[report], args.timestamp),
        Format::Csv => output::csv(&rows(args, &report)),
        Format::Text => Ok(text(args, &report)),
    }
}

fn rows<'a>(args: &BenchArgs, report: &'a BenchReport) -> Vec<MetricsRow<'a>> {
    let row = |workload, traversal, r: &LocalityReport| MetricsRow {
        workload,
        allocator: args.pool.allocator,
        traversal,
        slots: args.pool.slots,
        slot_size: args.pool.slot_size,
        line_size: args.line_size,
        seed: args.seed,
        sequential_fraction: r.sequential_fraction,
        distinct_lines: r.distinct_lines,
        mean_abs_gap: r.mean_abs_gap,
        traversal_len: r.traversal_len,
    };
    match report {
        BenchReport::Lifecycle(l) => vec![
            row("lifecycle", "first", &l.first_traversal),
            row("lifecycle", "second", &l.second_traversal),
        ],
        BenchReport::Churn(c) => vec![row("churn", "batch", &c.batch)],
    }
}

fn text(args: &BenchArgs, report: &BenchReport) -> String {
    let mut out = String::new();
    let pool = &args.pool;
    match report {
        BenchReport::Lifecycle(_) => writeln!(
            out,
            "lifecycle  allocator={}  nodes={}  slot_size={}  line_size={}  seed={} ({RNG_NAME})",
            pool.allocator, pool.slots, pool.slot_size, args.line_size, args.seed
        ),
        BenchReport::Churn(_) => writeln!(
            out,
            "churn  allocator={}  capacity={}  fill={}  ops={}  slot_size={}  line_size={}  seed={} ({RNG_NAME})",
            pool.allocator, pool.slots, args.fill, args.ops, pool.slot_size, args.line_size, args.seed
        ),
    }
    .unwrap();
    if args.timestamp {
        writeln!(out, "generated_at={}", output::unix_now()).unwrap();
    }
    writeln!(
        out,
        "{:<10} {:>10} {:>14} {:>12} {:>10}",
        "traversal", "sequential", "distinct_lines", "mean_gap", "length"
    )
    .unwrap();
    for r in rows(args, report) {
        writeln!(
            out,
            "{:<10} {:>10.4} {:>14} {:>12.2} {:>10}",
            r.traversal, r.sequential_fraction, r.distinct_lines, r.mean_abs_gap, r.traversal_len
        )
        .unwrap();
    }
    out
}
