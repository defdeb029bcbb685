//! Crate-wide error type. Every pipeline stage tags its failures so a
//! batch runner can report *where* a run died, not just that it died.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("brute force refused: n={n} exceeds cap {cap}")]
    BruteForceCap { n: usize, cap: usize },

    #[error("LP solver: {0}")]
    Lp(String),

    #[error("LP stalled after {0} pivots")]
    LpStall(usize),

    #[error("narrow cuts: {0}")]
    Cuts(String),

    #[error("decomposition: {0}")]
    Decompose(String),

    #[error("vector violates rank inequality: x(E[U]) = {lhs} > {rhs} = |U|-1 for U = {u_set:?}")]
    RankViolation {
        u_set: Vec<usize>,
        lhs: String,
        rhs: String,
    },

    #[error("rounding: {0}")]
    Rounding(String),

    #[error("structure violation during reassembly: {0}")]
    StructureViolation(String),

    #[error("reassembly iteration cap hit at tree {j}, cut {cut}")]
    IterationCap { j: u64, cut: usize },

    #[error("parity correction: {0}")]
    Parity(String),

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
