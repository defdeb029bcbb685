//! The certificate layer by hand: correction vectors and their polyhedron
//! membership, per-cut benefit audits, and the averaging chain that yields
//! the final guarantee.
//!
//!     cargo run --example certificates

use num_traits::One;
use num_rational::BigRational;
use path_tsp::analysis::{
    check_benefit_inequality, correction_vectors, tjoin_polyhedron_check, AnalysisParams,
};
use path_tsp::cuts::narrow_cuts;
use path_tsp::decompose::{decompose, round_distribution};
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::{solve_relaxation, ArithMode};
use path_tsp::parity::{min_tjoin, wrong_parity_set, MATCHING_CAP};
use path_tsp::ratio::{rat_from_str, rat_to_f64, rat_to_string};
use path_tsp::reassembly::{prefix_thresholds, reassemble};

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(16, 8, MetricKind::Euclidean)?;
    let sol = solve_relaxation(&inst, ArithMode::Exact)?;
    let chain = narrow_cuts(&sol, &inst)?;
    let dist = decompose(&sol.x, &inst)?;
    let ens = round_distribution(&dist, &rat_from_str("1/4").unwrap(), &inst)?;
    let thr = prefix_thresholds(&chain, ens.r, &ens.epsilon)?;
    let (out, _, _) = reassemble(&ens, &chain, &thr, inst.edge_index())?;
    let params = AnalysisParams::standard(ens.epsilon.clone());

    println!(
        "beta = {} (= {:.6}), delta = {}, guarantee 2 - beta + eps = {:.6}\n",
        rat_to_string(&params.beta),
        rat_to_f64(&params.beta),
        rat_to_string(&params.delta),
        rat_to_f64(&params.guarantee())
    );

    // correction vectors for the first tree under both gamma values
    let first_tree = &out.blocks[0].0;
    let t_set = wrong_parity_set(&inst, first_tree);
    let join = min_tjoin(&inst, &t_set, MATCHING_CAP)?;
    for gamma in [params.delta.clone(), BigRational::one() - &params.delta] {
        let cv = correction_vectors(&inst, first_tree, &gamma, &chain, &params, &sol.x)?;
        let scope = tjoin_polyhedron_check(&inst, &cv.y, &t_set, &chain)?;
        println!(
            "gamma = {:5.3}: c(y) = {:8.4}, join cost {:8.4} <= c(y): {}  (membership: {:?})",
            rat_to_f64(&gamma),
            rat_to_f64(&cv.y_cost),
            rat_to_f64(&join.cost),
            join.cost <= cv.y_cost,
            scope,
        );
    }

    println!("\nper-cut benefit audits (all must pass):");
    let audits = check_benefit_inequality(&out, &chain, &thr.required, &params)?;
    for audit in &audits {
        println!(
            "  C_{} (x* = {:.4}): pi = {:.4}, avg benefit {:.4} >= required {:.4} -> {}",
            audit.level,
            rat_to_f64(&audit.value),
            rat_to_f64(&audit.even_fraction),
            rat_to_f64(&audit.benefit_avg),
            rat_to_f64(&audit.required),
            audit.pass
        );
    }
    Ok(())
}
