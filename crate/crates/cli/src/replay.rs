use std::fmt::Write;

use anyhow::Context;
use bitfit::trace::{parse_trace, replay, ReplayRecord, TraceOp};
use bitfit::PolicyKind;
use serde::Serialize;

use crate::output;
use crate::{Format, ReplayArgs};

#[derive(Serialize)]
#[serde(tag = "kind", rename = "replay")]
struct ReplayReport<'a> {
    policy_kind: PolicyKind,
    record_count: usize,
    records: &'a [ReplayRecord],
}

#[derive(Serialize)]
struct CsvRow<'a> {
    line: usize,
    op: TraceOp,
    id: &'a str,
    slot: usize,
    offset: usize,
}

pub fn run(args: &ReplayArgs) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(&args.trace).with_context(|| format!("cannot read {}", args.trace.display()))?;
    let events = parse_trace(&text).with_context(|| format!("{}", args.trace.display()))?;
    let records = replay(&events, args.pool.allocator, args.pool.slots, args.pool.slot_size)
        .with_context(|| format!("{}", args.trace.display()))?;
    match args.pool.format {
        Format::Csv => {
            let rows: Vec<CsvRow> = records
                .iter()
                .map(|r| CsvRow {
                    line: r.line,
                    op: r.op,
                    id: &r.id,
                    slot: r.slot.get(),
                    offset: r.offset.get(),
                })
                .collect();
            output::csv(&rows)
        }
        Format::Json => {
            let report = ReplayReport {
                policy_kind: args.pool.allocator,
                record_count: records.len(),
                records: &records,
            };
            output::json("replay", args, &[report], false)
        }
        Format::Text => {
            let mut out = String::new();
            for r in &records {
                writeln!(
                    out,
                    "line {:>6}  {:<10} {:<16} slot {:>8}  offset {:>10}",
                    r.line, r.op, r.id, r.slot, r.offset
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}
