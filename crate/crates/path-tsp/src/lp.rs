//! The path relaxation and its separation oracle.
//!
//! Variables are the n(n-1)/2 edges of the complete graph. Degree rows fix
//! x(δ(v)) = 2 (= 1 at s and t); cut rows x(δ(U)) ≥ 2 (≥ 1 when U separates
//! s from t) are generated lazily from min-cut computations. Integral
//! solutions of this system are exactly the Hamiltonian s-t paths.
//!
//! Float mode pivots in f64 to discover the binding cut set cheaply, then
//! re-solves and re-separates in exact rationals, so the returned `x*` is
//! exact in either mode. Narrow-cut classification and all certificate
//! arithmetic downstream depend on that.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::flow::max_flow_min_cut;
use crate::instance::Instance;
use crate::ratio::{rat_from_str, rat_to_f64, rat_to_string, Scalar};
use crate::simplex::{Constraint, Rel, Tableau};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeSet;

/// Arithmetic mode of the LP pivoting path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithMode {
    /// f64 pivots with tolerance 1e-9, exact finishing pass.
    Float,
    /// rational pivots throughout.
    Exact,
}

/// An optimal extreme point of the relaxation, exact in both modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    /// Dense edge vector by edge id.
    pub x: Vec<BigRational>,
    /// c(x).
    pub value: BigRational,
}

impl FractionalSolution {
    pub fn x_f64(&self) -> Vec<f64> {
        self.x.iter().map(rat_to_f64).collect()
    }

    /// x(δ(U)).
    pub fn cut_value(&self, inst: &Instance, u_set: &BitSet) -> BigRational {
        let idx = inst.edge_index();
        let mut acc = BigRational::zero();
        for e in 0..idx.m() {
            if self.x[e].is_zero() {
                continue;
            }
            let (a, b) = idx.ends(e);
            if u_set.contains(a) != u_set.contains(b) {
                acc += &self.x[e];
            }
        }
        acc
    }

    /// Edges with positive value.
    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len())
            .filter(|&e| !self.x[e].is_zero())
            .collect()
    }

    pub fn to_json(&self, inst: &Instance) -> String {
        let idx = inst.edge_index();
        let mut edges = Vec::new();
        let mut edges_exact = Vec::new();
        for e in self.support() {
            let (u, v) = idx.ends(e);
            edges.push(serde_json::json!([u, v, rat_to_f64(&self.x[e])]));
            edges_exact.push(serde_json::json!([u, v, rat_to_string(&self.x[e])]));
        }
        serde_json::to_string_pretty(&serde_json::json!({
            "edges": edges,
            "value": rat_to_f64(&self.value),
            "edges_exact": edges_exact,
            "value_exact": rat_to_string(&self.value),
        }))
        .expect("serialization cannot fail")
    }

    pub fn from_json(text: &str, inst: &Instance) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let idx = inst.edge_index();
        let mut x = vec![BigRational::zero(); idx.m()];
        let exact = v.get("edges_exact").and_then(|e| e.as_array());
        if let Some(entries) = exact {
            for entry in entries {
                let u = entry[0].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                let w = entry[1].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                let val = entry[2]
                    .as_str()
                    .and_then(rat_from_str)
                    .ok_or_else(|| Error::Parse("bad exact value".into()))?;
                x[idx.id(u, w)] = val;
            }
        } else {
            let entries = v
                .get("edges")
                .and_then(|e| e.as_array())
                .ok_or_else(|| Error::Parse("missing edges".into()))?;
            for entry in entries {
                let u = entry[0].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                let w = entry[1].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                let val = entry[2]
                    .as_f64()
                    .ok_or_else(|| Error::Parse("bad value".into()))?;
                x[idx.id(u, w)] = crate::ratio::rat_from_f64(val);
            }
        }
        let value = inst.vector_cost(&x);
        Ok(FractionalSolution { x, value })
    }
}

/// A violated relaxation constraint found by the separation oracle.
#[derive(Clone, Debug)]
pub enum Violated {
    /// x(δ(U)) < bound.
    Cut {
        u_set: BitSet,
        bound: u32,
        value: BigRational,
    },
    /// x(δ(v)) off its equality target.
    Degree {
        v: usize,
        target: u32,
        value: BigRational,
    },
}

impl Violated {
    /// Size of the violation (how far below/off the bound).
    pub fn amount(&self) -> BigRational {
        match self {
            Violated::Cut { bound, value, .. } => {
                crate::ratio::rat_int(*bound as i64) - value.clone()
            }
            Violated::Degree { target, value, .. } => {
                (crate::ratio::rat_int(*target as i64) - value.clone()).abs_val()
            }
        }
    }
}

fn degree_target(inst: &Instance, v: usize) -> u32 {
    if v == inst.s() || v == inst.t() {
        1
    } else {
        2
    }
}

/// Cut bound for the side `u_set`: 1 when it separates s from t, else 2.
pub fn cut_bound(inst: &Instance, u_set: &BitSet) -> u32 {
    if u_set.contains(inst.s()) != u_set.contains(inst.t()) {
        1
    } else {
        2
    }
}

/// Separation oracle. Checks the two cut families by max-flow (s-t flow for
/// the ≥1 family; flows to {s,t} contracted, swept over all third vertices,
/// for the ≥2 family), then the degree equalities. Returns the first
/// violated constraint in that deterministic order, or None when feasible.
pub fn separate<S: Scalar>(x: &[S], inst: &Instance) -> Option<Violated> {
    let idx = inst.edge_index();
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());

    // >= 1 family: cuts separating s from t
    let src = BitSet::from_iter(n, [s]);
    let dst = BitSet::from_iter(n, [t]);
    let res = max_flow_min_cut(idx, x, &src, &dst);
    if res.value.clone() + S::tol() < S::one() {
        return Some(Violated::Cut {
            u_set: res.source_side,
            bound: 1,
            value: res.value.to_rat(),
        });
    }

    // >= 2 family: cuts avoiding both s and t (up to complement); contract
    // {s,t} and sweep all other vertices as the opposite terminal
    let two = S::one() + S::one();
    let st = BitSet::from_iter(n, [s, t]);
    for v in 0..n {
        if v == s || v == t {
            continue;
        }
        let vset = BitSet::from_iter(n, [v]);
        let res = max_flow_min_cut(idx, x, &vset, &st);
        if res.value.clone() + S::tol() < two {
            return Some(Violated::Cut {
                u_set: res.source_side,
                bound: 2,
                value: res.value.to_rat(),
            });
        }
    }

    for v in 0..n {
        let target = degree_target(inst, v);
        let mut deg = S::zero();
        for w in 0..n {
            if w != v {
                deg = deg + x[idx.id(v, w)].clone();
            }
        }
        let mut target_s = S::one();
        if target == 2 {
            target_s = target_s + S::one();
        }
        if !(deg.clone() - target_s).is_negligible() {
            return Some(Violated::Degree {
                v,
                target,
                value: deg.to_rat(),
            });
        }
    }

    None
}

/// Exhaustive 2^n cross-check of the separation families; returns the worst
/// violated constraint. Exact; intended for n ≤ 15.
pub fn separate_exhaustive(x: &[BigRational], inst: &Instance) -> Option<Violated> {
    let idx = inst.edge_index();
    let n = inst.n();
    let mut worst: Option<Violated> = None;
    let consider = |cand: Violated, worst: &mut Option<Violated>| {
        let amt = cand.amount();
        if amt <= BigRational::zero() {
            return;
        }
        match worst {
            None => *worst = Some(cand),
            Some(w) if amt > w.amount() => *worst = Some(cand),
            _ => {}
        }
    };
    for bits in 1..((1usize << n) - 1) {
        let u_set = BitSet::from_iter(n, (0..n).filter(|&v| bits >> v & 1 == 1));
        let bound = cut_bound(inst, &u_set);
        let mut val = BigRational::zero();
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if u_set.contains(a) != u_set.contains(b) {
                val += &x[e];
            }
        }
        if val < crate::ratio::rat_int(bound as i64) {
            consider(
                Violated::Cut {
                    u_set,
                    bound,
                    value: val,
                },
                &mut worst,
            );
        }
    }
    for v in 0..n {
        let target = degree_target(inst, v);
        let mut deg = BigRational::zero();
        for w in 0..n {
            if w != v {
                deg += &x[idx.id(v, w)];
            }
        }
        if deg != crate::ratio::rat_int(target as i64) {
            consider(
                Violated::Degree {
                    v,
                    target,
                    value: deg,
                },
                &mut worst,
            );
        }
    }
    worst
}

/// Feasibility report: worst violation across degrees and both cut
/// families (exhaustively for n ≤ 15, flow-based beyond).
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub worst: Option<Violated>,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn worst_violation(&self) -> BigRational {
        self.worst
            .as_ref()
            .map(|v| v.amount())
            .unwrap_or_else(BigRational::zero)
    }
}

pub const SEPARATION_EXHAUSTIVE_CAP: usize = 15;

pub fn check_feasible(x: &[BigRational], inst: &Instance, tol: &BigRational) -> FeasibilityReport {
    let worst = if inst.n() <= SEPARATION_EXHAUSTIVE_CAP {
        separate_exhaustive(x, inst)
    } else {
        separate::<BigRational>(x, inst)
    };
    let feasible = match &worst {
        None => true,
        Some(v) => v.amount() <= *tol,
    };
    FeasibilityReport { worst, feasible }
}

const MAX_CUT_ROUNDS: usize = 4096;

struct LoopOutcome<S> {
    x: Vec<S>,
    cut_rows: Vec<(BitSet, u32)>,
}

/// Cutting-plane loop in one arithmetic. Starts from the degree equalities
/// plus the n single-vertex cut rows and adds one violated cut per round.
fn solve_loop<S: Scalar>(inst: &Instance, warm_cuts: &[(BitSet, u32)]) -> Result<LoopOutcome<S>> {
    let idx = inst.edge_index();
    let n = inst.n();
    let m = idx.m();
    let costs: Vec<S> = (0..m).map(|e| S::from_rat(inst.edge_cost(e))).collect();

    let row_for = |u_set: &BitSet, bound: u32, rel: Rel| -> Constraint<S> {
        let mut coeffs = vec![S::zero(); m];
        for e in 0..m {
            let (a, b) = idx.ends(e);
            if u_set.contains(a) != u_set.contains(b) {
                coeffs[e] = S::one();
            }
        }
        let mut rhs = S::one();
        if bound == 2 {
            rhs = rhs + S::one();
        }
        Constraint { coeffs, rel, rhs }
    };

    let mut rows: Vec<Constraint<S>> = Vec::new();
    for v in 0..n {
        let vset = BitSet::from_iter(n, [v]);
        rows.push(row_for(&vset, degree_target(inst, v), Rel::Eq));
    }
    for v in 0..n {
        let vset = BitSet::from_iter(n, [v]);
        rows.push(row_for(&vset, degree_target(inst, v), Rel::Ge));
    }

    let mut pool: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cut_rows: Vec<(BitSet, u32)> = Vec::new();
    for (u_set, bound) in warm_cuts {
        if pool.insert(u_set.to_vec()) {
            rows.push(row_for(u_set, *bound, Rel::Ge));
            cut_rows.push((u_set.clone(), *bound));
        }
    }

    for _round in 0..MAX_CUT_ROUNDS {
        let mut tab = Tableau::new(costs.clone(), rows.clone());
        tab.solve()?;
        let x: Vec<S> = (0..m).map(|e| tab.primal(e)).collect();
        match separate(&x, inst) {
            None => return Ok(LoopOutcome { x, cut_rows }),
            Some(Violated::Cut { u_set, bound, .. }) => {
                if !pool.insert(u_set.to_vec()) {
                    // The same cut came back: numerically stuck.
                    return Err(Error::LpStall(tab.pivot_count()));
                }
                rows.push(row_for(&u_set, bound, Rel::Ge));
                cut_rows.push((u_set, bound));
            }
            Some(Violated::Degree { v, value, .. }) => {
                return Err(Error::Lp(format!(
                    "degree equality at {v} off despite being a row (value {value})"
                )));
            }
        }
    }
    Err(Error::LpStall(MAX_CUT_ROUNDS))
}

/// Solve the relaxation to an exact optimal extreme point.
///
/// Float mode runs the loop in f64 and finishes exactly (re-solving with
/// the discovered cut rows in rationals, then re-separating exactly); a
/// float stall falls back to the fully exact loop.
pub fn solve_relaxation(inst: &Instance, mode: ArithMode) -> Result<FractionalSolution> {
    let outcome: LoopOutcome<BigRational> = match mode {
        ArithMode::Exact => solve_loop(inst, &[])?,
        ArithMode::Float => {
            let float_pass: Result<LoopOutcome<f64>> = solve_loop(inst, &[]);
            match float_pass {
                Ok(out) => solve_loop(inst, &out.cut_rows)?,
                Err(Error::LpStall(_)) => solve_loop(inst, &[])?,
                Err(e) => return Err(e),
            }
        }
    };

    let x = outcome.x;
    let value = inst.vector_cost(&x);

    // Implied identity x(E) = n-1: half the degree-equality total.
    let total: BigRational = x.iter().cloned().sum();
    if total != crate::ratio::rat_int(inst.n() as i64 - 1) {
        return Err(Error::Lp(format!(
            "x(E) = {total} differs from n-1; solver inconsistency"
        )));
    }
    debug_assert!(separate::<BigRational>(&x, inst).is_none());

    Ok(FractionalSolution { x, value })
}
