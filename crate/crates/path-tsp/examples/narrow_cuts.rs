//! The narrow cuts of a relaxation optimum form a nested chain between
//! {s} and V∖{t}. Both constructions (exhaustive enumeration and the
//! flow-based mode) are run and compared.
//!
//!     cargo run --example narrow_cuts

use num_rational::BigRational;
use num_traits::Zero;
use path_tsp::cuts::{narrow_cuts_enumerate, narrow_cuts_flow};
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::{solve_relaxation, ArithMode};
use path_tsp::ratio::rat_to_f64;

fn main() -> path_tsp::Result<()> {
    for seed in [2u64, 4, 8] {
        let inst = Instance::random(seed, 9, MetricKind::Euclidean)?;
        let sol = solve_relaxation(&inst, ArithMode::Exact)?;
        let zero = BigRational::zero();
        let by_enum = narrow_cuts_enumerate(&sol, &inst, &zero)?;
        let by_flow = narrow_cuts_flow(&sol, &inst, &zero)?;

        println!("seed {seed}: {} narrow cuts (ell = {})", by_enum.len(), by_enum.ell());
        for i in 0..by_enum.len() {
            println!(
                "  U_{i} = {:?}  x*(C_{i}) = {:.4}",
                by_enum.level(i).to_vec(),
                rat_to_f64(by_enum.value(i))
            );
            assert_eq!(by_enum.level(i), by_flow.level(i));
            assert_eq!(by_enum.value(i), by_flow.value(i));
        }
        println!("  flow-based construction agrees\n");
    }
    Ok(())
}
