//! Best-of-many parity correction: every tree of the decomposition gets a
//! minimum T-join and an Eulerian shortcut tour; the cheapest tour wins.
//!
//!     cargo run --example parity_correction

use path_tsp::decompose::decompose;
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::{solve_relaxation, ArithMode};
use path_tsp::parity::{assemble_tour, min_tjoin, wrong_parity_set, MATCHING_CAP};
use path_tsp::ratio::rat_to_f64;

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(9, 9, MetricKind::Euclidean)?;
    let sol = solve_relaxation(&inst, ArithMode::Exact)?;
    let dist = decompose(&sol.x, &inst)?;
    println!(
        "lp value {:.4}; {} trees in the combination\n",
        rat_to_f64(&sol.value),
        dist.len()
    );

    let mut best: Option<path_tsp::instance::HamPath> = None;
    for (i, (tree, weight)) in dist.blocks.iter().enumerate() {
        let t_set = wrong_parity_set(&inst, tree);
        let join = min_tjoin(&inst, &t_set, MATCHING_CAP)?;
        let cand = assemble_tour(&inst, tree, &join)?;
        println!(
            "tree {:2} (weight {:.4}): |T| = {:2}, c(S) = {:7.3}, c(J) = {:6.3}, tour = {:7.3}",
            i,
            rat_to_f64(weight),
            t_set.count(),
            rat_to_f64(&cand.tree_cost),
            rat_to_f64(&join.cost),
            rat_to_f64(&cand.path.cost),
        );
        if best.as_ref().is_none_or(|b| cand.path.cost < b.cost) {
            best = Some(cand.path);
        }
    }
    let best = best.expect("at least one tree");
    println!(
        "\nbest tour {:.4} (ratio vs lp {:.4}): {:?}",
        rat_to_f64(&best.cost),
        rat_to_f64(&best.cost) / rat_to_f64(&sol.value),
        best.order
    );
    Ok(())
}
