//! Write x* as a convex combination of spanning trees by column
//! generation, verify the combination exactly, then round it to a
//! uniform multiset of r trees and inspect what the rounding clipped.
//!
//!     cargo run --example tree_decomposition

use num_rational::BigRational;
use num_traits::Zero;
use path_tsp::decompose::{decompose, round_distribution, verify_combination};
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::{solve_relaxation, ArithMode};
use path_tsp::ratio::{rat_from_str, rat_to_f64, rat_to_string};

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(12, 8, MetricKind::Euclidean)?;
    let sol = solve_relaxation(&inst, ArithMode::Exact)?;
    let idx = inst.edge_index();

    let dist = decompose(&sol.x, &inst)?;
    println!(
        "decomposed x* into {} spanning trees (Caratheodory bound {})",
        dist.len(),
        idx.m() + 1
    );
    for (tree, w) in &dist.blocks {
        let edges: Vec<(usize, usize)> = tree.iter().map(|e| idx.ends(e)).collect();
        println!("  weight {:8} ({:.4})  {:?}", rat_to_string(w), rat_to_f64(w), edges);
    }
    assert!(verify_combination(&dist, &sol.x, idx, &BigRational::zero()));
    println!("combination reproduces x* exactly\n");

    let eps = rat_from_str("1/3").unwrap();
    let ens = round_distribution(&dist, &eps, &inst)?;
    println!(
        "rounded at epsilon = {} (snapped from 1/3): r = {}, sum p' = {}",
        rat_to_string(&ens.epsilon),
        ens.r,
        rat_to_string(&ens.sum_p_prime)
    );
    for (tree, mult) in &ens.blocks {
        println!("  multiplicity {:6}  ({} edges)", mult, tree.count());
    }
    println!(
        "leftover: {} trees, total {} (bound epsilon/n = {})",
        ens.leftover.len(),
        rat_to_string(&ens.leftover.total()),
        rat_to_string(&(ens.epsilon.clone() / path_tsp::ratio::rat_int(inst.n() as i64)))
    );
    Ok(())
}
