//! Parse TSPLIB text (EUC_2D coordinates or explicit matrices) and the
//! native JSON format, then run the solver on the parsed instance.
//!
//!     cargo run --example tsplib_parsing

use path_tsp::driver::{cmd_solve, RunConfig};
use path_tsp::instance::{Instance, InstanceFormat};
use path_tsp::ratio::rat_from_str;

const EUC_2D_TEXT: &str = "\
NAME: square8
TYPE: TSP
DIMENSION: 8
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 40 5
3 80 0
4 85 40
5 80 80
6 40 85
7 0 80
8 5 40
EOF
";

const UPPER_ROW_TEXT: &str = "\
NAME: tiny5
TYPE: TSP
DIMENSION: 5
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: UPPER_ROW
EDGE_WEIGHT_SECTION
3 4 5 6
2 3 4
2 3
2
EOF
";

fn main() -> path_tsp::Result<()> {
    // endpoints default to the first and last node unless overridden
    let square = Instance::parse(EUC_2D_TEXT, InstanceFormat::Tsplib, None)?;
    println!(
        "{}: n = {}, s = {}, t = {}, c(s,t) = {}",
        square.name(),
        square.n(),
        square.s(),
        square.t(),
        square.cost(square.s(), square.t())
    );

    let tiny = Instance::parse(UPPER_ROW_TEXT, InstanceFormat::Tsplib, Some((0, 2)))?;
    println!(
        "{}: n = {}, closure applied = {}",
        tiny.name(),
        tiny.n(),
        tiny.raw_costs().is_some()
    );

    // native JSON round trip
    let json = tiny.to_native_json();
    let back = Instance::parse(&json, InstanceFormat::NativeJson, None)?;
    assert_eq!(back.costs(), tiny.costs());
    println!("native JSON round trip ok\n");

    let cfg = RunConfig {
        epsilon_request: rat_from_str("1/4"),
        ..RunConfig::default()
    };
    let outcome = cmd_solve(&square, &cfg)?;
    print!("{}", outcome.report.summary());
    Ok(())
}
