//! The exhaustive optimum oracle next to the approximation pipeline:
//! LP value <= optimum <= best tour <= guarantee * LP value.
//!
//!     cargo run --example brute_force_oracle

use path_tsp::driver::{cmd_solve, RunConfig};
use path_tsp::instance::{Instance, MetricKind, BRUTE_FORCE_CAP};
use path_tsp::ratio::{rat_from_str, rat_to_f64};

fn main() -> path_tsp::Result<()> {
    println!("seed  kind            lp        opt       best      best/opt  best/lp");
    for seed in 0..6u64 {
        for kind in [MetricKind::Euclidean, MetricKind::GraphMetric] {
            let inst = Instance::random(seed, 9, kind)?;
            let opt = inst.brute_force_opt(BRUTE_FORCE_CAP)?;
            let cfg = RunConfig {
                epsilon_request: rat_from_str("1/2"),
                compute_opt: false, // computed by hand above
                ..RunConfig::default()
            };
            let outcome = cmd_solve(&inst, &cfg)?;
            let lp = outcome.report.lp_value.approx;
            let best = outcome.best.cost.clone();
            assert!(outcome.report.lp_value.to_rat().unwrap() <= opt.cost);
            assert!(opt.cost <= best);
            println!(
                "{seed:4}  {kind:?}  {lp:9.3} {opt:9.3} {best:9.3} {ropt:9.4} {rlp:8.4}",
                kind = kind,
                opt = rat_to_f64(&opt.cost),
                best = rat_to_f64(&best),
                ropt = rat_to_f64(&best) / rat_to_f64(&opt.cost),
                rlp = outcome.report.ratio_lp.approx,
            );
        }
    }
    Ok(())
}
