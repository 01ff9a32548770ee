//! Acceptance criteria. Run with `cargo test -p bitfit-cli --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use bitfit::trace::{generate_trace, parse_trace, print_trace, TraceKind};
use bitfit::workload::{run_list_lifecycle, LifecycleParams};
use bitfit::{AllocError, AllocatorPolicy, BitTree, LinearBitmapPolicy, PolicyKind, SlotIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, &str, Check); 7] = [
        ("AC1", "worked examples on an 8-slot tree", worked_examples),
        ("AC2", "oracle equivalence over 1e5 random ops", oracle_equivalence),
        ("AC3", "integrity after every one of 1e5 ops", integrity),
        ("AC4", "per-operation node visits are logarithmic", complexity),
        ("AC5", "lifecycle locality recovery over 10 seeds", locality_recovery),
        (
            "AC6",
            "hint postcondition and distance ordering at 70% fill",
            hint_quality,
        ),
        (
            "AC7",
            "trace round trip and CLI determinism",
            round_trip_and_determinism,
        ),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {why}");
            }
        }
    }
    let _ = panic::take_hook();
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}

fn bits_string(t: &BitTree) -> String {
    t.bits().into_iter().map(|b| if b { '1' } else { '0' }).collect()
}

fn worked_examples() -> Result<String, String> {
    // first allocate
    let mut t = BitTree::new(8).unwrap();
    ensure!(bits_string(&t) == "000000000000000", "fresh tree {}", bits_string(&t));
    let s = t.allocate().unwrap();
    ensure!(s == SlotIndex(0) && t.leaf_index(s) == 7, "first allocate gave {s}");
    ensure!(
        bits_string(&t) == "000000010000000",
        "after first allocate {}",
        bits_string(&t)
    );

    // free the 6th location (leaf 12) with slots 0..=5 used
    let mut t = BitTree::new(8).unwrap();
    for _ in 0..6 {
        t.allocate().unwrap();
    }
    ensure!(bits_string(&t) == "010111011111100", "six used {}", bits_string(&t));
    let steps = t.op_steps();
    t.release(SlotIndex(5)).unwrap();
    ensure!(
        bits_string(&t) == "010110011111000",
        "after freeing leaf 12 {}",
        bits_string(&t)
    );
    // read+write leaf, read+write node 5, read node 2 and stop
    let visits = t.op_steps() - steps;
    ensure!(visits == 5, "free visited {visits} nodes, expected early stop after 5");

    // hinted allocate toward leaf 11 with subtree 2 full
    let mut t = BitTree::new(8).unwrap();
    for _ in 0..8 {
        t.allocate().unwrap();
    }
    for s in 0..4 {
        t.release(SlotIndex(s)).unwrap();
    }
    ensure!(bits_string(&t) == "001001100001111", "hint setup {}", bits_string(&t));
    let s = t.allocate_with_hint(SlotIndex(4)).unwrap();
    ensure!(
        t.leaf_index(s) == 10,
        "hinted allocate reached leaf {}",
        t.leaf_index(s)
    );
    ensure!(bits_string(&t) == "001001100011111", "after hint {}", bits_string(&t));
    Ok("leaf 7; 12 -> 5, stop at 2; leaf 10".into())
}

/// Random alloc/free stream with alternating bias so the run hits both
/// exhaustion and double frees.
fn op_stream(seed: u64, count: usize, capacity: usize) -> Vec<Option<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let p_alloc = if (i / 5000) % 2 == 0 { 0.8 } else { 0.25 };
            if rng.gen_bool(p_alloc) {
                None
            } else {
                Some(rng.gen_range(0..capacity))
            }
        })
        .collect()
}

fn oracle_equivalence() -> Result<String, String> {
    const CAP: usize = 1024;
    let ops = op_stream(2024, 100_000, CAP);
    let start = Instant::now();
    let mut tree = BitTree::new(CAP).unwrap();
    let mut oracle = LinearBitmapPolicy::new(CAP).unwrap();
    let (mut exhausted, mut double_frees) = (0, 0);
    for (i, op) in ops.iter().enumerate() {
        let (a, b) = match *op {
            None => (tree.allocate().map(|s| s.get()), oracle.allocate().map(|s| s.get())),
            Some(s) => (
                tree.release(SlotIndex(s)).map(|_| s),
                oracle.release(SlotIndex(s)).map(|_| s),
            ),
        };
        ensure!(a == b, "op {i}: tree {a:?} vs oracle {b:?}");
        match a {
            Err(AllocError::PoolExhausted) => exhausted += 1,
            Err(AllocError::DoubleFree(_)) => double_frees += 1,
            _ => {}
        }
    }
    let elapsed = start.elapsed();
    ensure!(exhausted > 0 && double_frees > 0, "stream never hit both error kinds");
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "identical, {exhausted} exhaustions, {double_frees} double frees, {elapsed:.2?}"
    ))
}

fn integrity() -> Result<String, String> {
    const CAP: usize = 1024;
    let ops = op_stream(2024, 100_000, CAP);
    let mut tree = BitTree::new(CAP).unwrap();
    for (i, op) in ops.iter().enumerate() {
        let _ = match *op {
            None => tree.allocate().map(|_| ()),
            Some(s) => tree.release(SlotIndex(s)),
        };
        ensure!(tree.check_integrity(), "integrity broken after op {i}");
    }
    // phantom leaves and the counter on a non-power-of-two tree as well
    let mut t = BitTree::new(1000).unwrap();
    for (i, op) in op_stream(7, 20_000, 1000).iter().enumerate() {
        let _ = match *op {
            None => t.allocate().map(|_| ()),
            Some(s) => t.release(SlotIndex(s)),
        };
        ensure!(t.check_integrity(), "capacity 1000: integrity broken after op {i}");
    }
    Ok("1e5 ops on 1024 slots and 2e4 ops on 1000 slots".into())
}

fn max_visits(log_n: u32, seed: u64) -> u64 {
    let n = 1usize << log_n;
    let mut t = BitTree::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max = 0;
    let mut measure = |t: &mut BitTree, op: &mut dyn FnMut(&mut BitTree)| {
        let before = t.op_steps();
        op(t);
        max = max.max(t.op_steps() - before);
    };
    // fill completely: every allocate that completes a subtree propagates far
    for _ in 0..n {
        measure(&mut t, &mut |t| {
            t.allocate().unwrap();
        });
    }
    measure(&mut t, &mut |t| {
        let _ = t.allocate();
    });
    // free everything in random order: releases on a full tree clear long paths
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &s in &order {
        measure(&mut t, &mut |t| t.release(SlotIndex(s)).unwrap());
    }
    // mixed random operations including hints
    for _ in 0..20_000 {
        let s = SlotIndex(rng.gen_range(0..n));
        match rng.gen_range(0..3) {
            0 => measure(&mut t, &mut |t| {
                let _ = t.allocate();
            }),
            1 => measure(&mut t, &mut |t| {
                let _ = t.allocate_with_hint(s);
            }),
            _ => measure(&mut t, &mut |t| {
                let _ = t.release(s);
            }),
        }
    }
    max
}

fn complexity() -> Result<String, String> {
    let sizes = [4u32, 10, 16];
    let mut observed = Vec::new();
    for &log_n in &sizes {
        let max = max_visits(log_n, 5);
        let bound = 6 * log_n as u64 + 4;
        ensure!(max <= bound, "n_leaves=2^{log_n}: max {max} > bound {bound}");
        observed.push(max);
    }
    for i in 1..sizes.len() {
        let doublings = (sizes[i] - sizes[i - 1]) as u64;
        let growth = observed[i].saturating_sub(observed[i - 1]);
        ensure!(
            growth <= 6 * doublings,
            "max grew by {growth} over {doublings} doublings (more than 6 per doubling)"
        );
    }
    Ok(format!(
        "max visits {:?} for n_leaves 2^{:?}, bounds {:?}",
        observed,
        sizes,
        sizes.iter().map(|l| 6 * l + 4).collect::<Vec<_>>()
    ))
}

fn locality_recovery() -> Result<String, String> {
    let start = Instant::now();
    let mut worst_lifo: f64 = 0.0;
    for seed in 1..=10 {
        let params = LifecycleParams::new(10_000, 32, seed);
        let bitmap = run_list_lifecycle(PolicyKind::Bitmap, params).map_err(|e| e.to_string())?;
        let lifo = run_list_lifecycle(PolicyKind::FreelistLifo, params).map_err(|e| e.to_string())?;
        let b = bitmap.second_traversal.sequential_fraction;
        let l = lifo.second_traversal.sequential_fraction;
        ensure!(b == 1.0, "seed {seed}: bitmap second traversal {b}");
        ensure!(l < 0.05, "seed {seed}: freelist-lifo second traversal {l}");
        worst_lifo = worst_lifo.max(l);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "bitmap 1.0 on all seeds, freelist-lifo max {worst_lifo:.4}, {elapsed:.2?}"
    ))
}

/// Leaf range `[lo, hi)` of the smallest subtree on the hint's root path whose
/// bit is clear, computed from the raw leaf occupancy.
fn smallest_free_subtree(occ: &[bool], n_leaves: usize, hint: usize) -> Option<(usize, usize)> {
    let mut span = 1;
    while span <= n_leaves {
        let lo = hint / span * span;
        let hi = lo + span;
        let has_free = (lo..hi).any(|s| s < occ.len() && !occ[s]);
        if has_free {
            return Some((lo, hi));
        }
        span *= 2;
    }
    None
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn hint_quality() -> Result<String, String> {
    const CAP: usize = 1024;
    const TRIALS: usize = 1000;
    let used_count = (CAP as f64 * 0.7).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut hinted = Vec::with_capacity(TRIALS);
    let mut plain = Vec::with_capacity(TRIALS);
    for trial in 0..TRIALS {
        let mut slots: Vec<usize> = (0..CAP).collect();
        slots.shuffle(&mut rng);
        let mut occ = vec![false; CAP];
        for &s in &slots[..used_count] {
            occ[s] = true;
        }
        let hint = slots[rng.gen_range(0..used_count)];
        let mut tree = BitTree::from_occupancy(&occ).unwrap();
        let mut baseline = tree.clone();

        let got = tree
            .allocate_with_hint(SlotIndex(hint))
            .map_err(|e| e.to_string())?
            .get();
        let (lo, hi) = smallest_free_subtree(&occ, tree.n_leaves(), hint).ok_or("no free slot")?;
        ensure!(!occ[got], "trial {trial}: returned used slot {got}");
        ensure!(
            (lo..hi).contains(&got),
            "trial {trial}: hint {hint} returned {got}, outside smallest free subtree [{lo}, {hi})"
        );
        let left = AllocatorPolicy::allocate(&mut baseline)
            .map_err(|e| e.to_string())?
            .get();
        hinted.push(got.abs_diff(hint));
        plain.push(left.abs_diff(hint));
    }
    let (mh, mp) = (median(hinted), median(plain));
    ensure!(mh <= mp, "median hinted distance {mh} > median leftmost distance {mp}");
    Ok(format!(
        "postcondition 1000/1000, median distance hinted {mh} vs leftmost {mp}"
    ))
}

fn round_trip_and_determinism() -> Result<String, String> {
    let kinds = [
        TraceKind::Lifecycle { node_count: 200 },
        TraceKind::Churn {
            capacity: 256,
            target_fill: 0.7,
            ops: 2000,
            hint_ratio: 0.3,
        },
        TraceKind::Churn {
            capacity: 64,
            target_fill: 0.5,
            ops: 0,
            hint_ratio: 0.0,
        },
    ];
    let mut traces = 0;
    for kind in kinds {
        for seed in 0..5 {
            let text = generate_trace(kind, seed).map_err(|e| e.to_string())?;
            let events = parse_trace(&text).map_err(|e| e.to_string())?;
            let printed = print_trace(&events);
            ensure!(printed == text, "{kind:?} seed {seed}: print(parse(t)) != t");
            ensure!(
                parse_trace(&printed).map_err(|e| e.to_string())? == events,
                "{kind:?} seed {seed}: parse(print(e)) != e"
            );
            traces += 1;
        }
    }

    let exe = env!("CARGO_BIN_EXE_bitfit");
    let configs: [&[&str]; 4] = [
        &[
            "bench",
            "--workload",
            "lifecycle",
            "--allocator",
            "bitmap",
            "--slots",
            "2000",
            "--seed",
            "3",
            "--format",
            "json",
        ],
        &[
            "bench",
            "--workload",
            "lifecycle",
            "--allocator",
            "freelist-fifo",
            "--slots",
            "2000",
            "--format",
            "json",
        ],
        &[
            "bench",
            "--workload",
            "churn",
            "--allocator",
            "freelist-lifo",
            "--slots",
            "1024",
            "--fill",
            "0.7",
            "--ops",
            "5000",
            "--format",
            "json",
        ],
        &["demo", "--format", "json"],
    ];
    for args in configs {
        let run = || Command::new(exe).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (run()?, run()?);
        ensure!(
            a.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        ensure!(a.stdout == b.stdout, "{args:?}: outputs differ between runs");
        serde_json::from_slice::<serde_json::Value>(&a.stdout).map_err(|e| format!("{args:?}: {e}"))?;
    }
    Ok(format!(
        "{traces} traces round-trip, {} CLI configs byte-identical",
        configs.len()
    ))
}
