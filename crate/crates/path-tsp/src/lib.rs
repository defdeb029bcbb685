//! Solver toolkit for the metric s-t-path TSP.
//!
//! The pipeline follows the best-of-many Christofides scheme on a
//! *reassembled* distribution of spanning trees:
//!
//! 1. [`lp`] solves the path relaxation by cutting planes and returns an
//!    exact optimal extreme point `x*`.
//! 2. [`cuts`] lists the narrow cuts of `x*` (the s-t cuts of value < 2),
//!    which always form a nested chain.
//! 3. [`decompose`] writes `x*` as a convex combination of spanning trees
//!    and rounds it to a uniform-weight multiset of `r` trees.
//! 4. [`reassembly`] exchanges edges between trees until, at every narrow
//!    cut, a guaranteed prefix of the trees crosses it exactly once.
//! 5. [`parity`] turns each tree into an s-t tour via a minimum T-join and
//!    Eulerian shortcutting; the cheapest tour wins.
//! 6. [`analysis`] certifies every structural claim and the final
//!    approximation bound in exact rational arithmetic.
//!
//! Each step is exposed on its own; `driver` wires them into the `solve`,
//! `verify`, `batch`, `brute` and `lp` commands, and the `examples/`
//! directory demonstrates every stage in isolation.

pub mod analysis;
pub mod bits;
pub mod cuts;
pub mod decompose;
pub mod driver;
pub mod error;
pub mod flow;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod parity;
pub mod ratio;
pub mod reassembly;
pub mod report;
pub mod simplex;

pub use error::{Error, Result};
pub use instance::Instance;
