use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Top-level shape of every JSON document the CLI prints.
#[derive(Serialize)]
struct Envelope<'a, C, R> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    config: &'a C,
    reports: &'a [R],
}

pub fn json<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    reports: &[R],
    timestamp: bool,
) -> anyhow::Result<String> {
    let generated_at = timestamp.then(unix_now);
    let mut out = serde_json::to_string_pretty(&Envelope {
        command,
        generated_at,
        config,
        reports,
    })?;
    out.push('\n');
    Ok(out)
}

pub fn csv<R: Serialize>(rows: &[R]) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
