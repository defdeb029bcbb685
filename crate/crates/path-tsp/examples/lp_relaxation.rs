//! Solve the path relaxation alone and inspect the optimum vector: its
//! support, degree structure, and an exhaustive feasibility check.
//!
//!     cargo run --example lp_relaxation

use num_rational::BigRational;
use num_traits::Zero;
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::{check_feasible, solve_relaxation, ArithMode};
use path_tsp::ratio::{rat_to_f64, rat_to_string};

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(21, 8, MetricKind::RandomClosure)?;
    println!("instance {} (n = {})", inst.name(), inst.n());

    // float pivots with exact finishing vs. exact pivots throughout
    let float_path = solve_relaxation(&inst, ArithMode::Float)?;
    let exact_path = solve_relaxation(&inst, ArithMode::Exact)?;
    assert_eq!(float_path.value, exact_path.value);
    println!(
        "lp value {} ({:.6}) — identical in both arithmetic modes",
        rat_to_string(&exact_path.value),
        rat_to_f64(&exact_path.value)
    );

    let idx = inst.edge_index();
    println!("support ({} edges):", exact_path.support().len());
    for e in exact_path.support() {
        let (u, v) = idx.ends(e);
        println!(
            "  ({u},{v})  x = {:6} ({:.4})",
            rat_to_string(&exact_path.x[e]),
            rat_to_f64(&exact_path.x[e])
        );
    }

    let report = check_feasible(&exact_path.x, &inst, &BigRational::zero());
    println!(
        "exhaustive feasibility check: feasible = {}, worst violation = {}",
        report.feasible,
        rat_to_string(&report.worst_violation())
    );
    Ok(())
}
