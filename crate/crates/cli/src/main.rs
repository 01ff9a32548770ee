mod bench;
mod demo;
mod output;
mod replay;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bitfit::PolicyKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "bitfit",
    version,
    about = "Locality benchmarks and trace replay for the bitfit pool allocator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the list lifecycle or random churn workload and report locality.
    Bench(BenchArgs),
    /// Replay a trace file through an allocator and print each placement.
    Replay(ReplayArgs),
    /// Walk through allocate, free and hinted allocate on an 8-slot tree.
    Demo(DemoArgs),
    /// Emit a generated trace on standard output.
    GenTrace(GenTraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Workload {
    Lifecycle,
    Churn,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: bitfit::ParsePolicyKindError| e.to_string())
}

fn parse_fill(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("fill must lie strictly between 0 and 1".into())
    }
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err("ratio must lie in [0, 1]".into())
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PoolArgs {
    /// bitmap, freelist-lifo, freelist-fifo or linear-bitmap
    #[arg(long, value_parser = parse_policy, default_value = "bitmap")]
    #[serde(rename = "allocator")]
    pub allocator: PolicyKind,
    /// Pool capacity in slots (list length for the lifecycle workload).
    #[arg(long, value_parser = positive, default_value = "10000")]
    pub slots: usize,
    #[arg(long = "slot-size", value_parser = positive, default_value = "32")]
    pub slot_size: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "lifecycle")]
    pub workload: Workload,
    #[command(flatten)]
    #[serde(flatten)]
    pub pool: PoolArgs,
    #[arg(long, default_value = "1")]
    pub seed: u64,
    #[arg(long = "line-size", value_parser = positive, default_value = "64")]
    pub line_size: usize,
    /// Target fill for the churn workload.
    #[arg(long, value_parser = parse_fill, default_value = "0.7")]
    pub fill: f64,
    /// Churn operations.
    #[arg(long, default_value = "10000")]
    pub ops: usize,
    /// Add a generation timestamp to the output (breaks byte-identical reruns).
    #[arg(long)]
    #[serde(skip)]
    pub timestamp: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub pool: PoolArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DemoArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct GenTraceArgs {
    #[arg(long, value_enum, default_value = "lifecycle")]
    pub workload: Workload,
    #[arg(long, value_parser = positive, default_value = "10000")]
    pub slots: usize,
    #[arg(long, default_value = "1")]
    pub seed: u64,
    #[arg(long, value_parser = parse_fill, default_value = "0.7")]
    pub fill: f64,
    #[arg(long, default_value = "10000")]
    pub ops: usize,
    /// Share of churn allocations emitted as alloc_hint.
    #[arg(long = "hint-ratio", value_parser = parse_ratio, default_value = "0")]
    pub hint_ratio: f64,
}

fn gen_trace(args: &GenTraceArgs) -> anyhow::Result<String> {
    use bitfit::trace::{generate_trace, TraceKind};
    let kind = match args.workload {
        Workload::Lifecycle => TraceKind::Lifecycle { node_count: args.slots },
        Workload::Churn => TraceKind::Churn {
            capacity: args.slots,
            target_fill: args.fill,
            ops: args.ops,
            hint_ratio: args.hint_ratio,
        },
    };
    Ok(generate_trace(kind, args.seed)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => err.exit(),
        Err(err) => {
            let rendered = err.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Bench(args) => bench::run(args),
        Command::Replay(args) => replay::run(args),
        Command::Demo(args) => demo::run(args),
        Command::GenTrace(args) => gen_trace(args),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
