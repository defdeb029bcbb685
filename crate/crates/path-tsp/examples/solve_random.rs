//! Full pipeline on one random instance: relaxation, narrow cuts, tree
//! decomposition, reassembly, parity correction, certificates.
//!
//!     cargo run --example solve_random

use path_tsp::driver::{cmd_solve, RunConfig};
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::ratio::rat_from_str;

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(7, 8, MetricKind::Euclidean)?;
    let cfg = RunConfig {
        epsilon_request: rat_from_str("1/4"),
        ..RunConfig::default()
    };
    let outcome = cmd_solve(&inst, &cfg)?;
    print!("{}", outcome.report.summary());

    println!("\nper-cut audit:");
    for cut in &outcome.report.cuts {
        println!(
            "  |U| = {:2}  x*(C) = {:8} ({:.4})  theta = {:5}  benefit {:.4} >= {:.4}  pass = {}",
            cut.size,
            cut.value.exact,
            cut.value.approx,
            cut.theta,
            cut.audit.benefit_avg.approx,
            cut.audit.required.approx,
            cut.audit.pass
        );
    }
    println!("\nbest tour order: {:?}", outcome.best.order);
    Ok(())
}
