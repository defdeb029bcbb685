//! Sweep many random instances concurrently and aggregate the observed
//! approximation ratios against the guarantee 2 - beta + epsilon.
//!
//!     cargo run --release --example batch_experiments

use path_tsp::driver::{cmd_batch, BatchItem, RunConfig};
use path_tsp::instance::MetricKind;
use path_tsp::ratio::rat_from_str;

fn main() {
    let kinds = [
        MetricKind::Euclidean,
        MetricKind::GraphMetric,
        MetricKind::RandomClosure,
    ];
    let mut items = Vec::new();
    for seed in 0..10u64 {
        for n in 6..=9usize {
            for kind in kinds {
                items.push(BatchItem { seed, n, kind });
            }
        }
    }
    let cfg = RunConfig {
        epsilon_request: rat_from_str("1/2"),
        ..RunConfig::default()
    };
    println!("running {} instances...", items.len());
    let stats = cmd_batch(&items, &cfg);

    println!("runs: {}", stats.runs);
    if let Some((exact, approx)) = &stats.max_ratio_lp {
        println!("max ratio vs lp: {exact} ({approx:.6})");
    }
    if let Some(mean) = stats.mean_ratio_lp {
        println!("mean ratio vs lp: {mean:.6}");
    }
    if let Some(margin) = stats.worst_cut_margin {
        println!("worst benefit slack across all cuts: {margin:.6}");
    }
    if stats.all_passed() {
        println!("all runs passed every certificate");
    } else {
        for (label, err) in &stats.failures {
            println!("FAIL {label}: {err}");
        }
        std::process::exit(1);
    }
}
