//! Narrow cuts of a relaxation optimum: the s-t separating cuts C = δ(U)
//! with x*(C) < 2. For a feasible x* they always form a nested chain
//! {s} = U_0 ⊂ U_1 ⊂ … ⊂ U_ℓ = V∖{t}; nesting is re-verified here and a
//! violation is a hard error (it would mean the input was infeasible).
//!
//! Two constructions: exhaustive subset enumeration (exact, n ≤ 20, with an
//! f64 prefilter) and a flow-based mode that orders vertices by the least
//! chain level containing them, probing pairs with min-cut computations.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::flow::max_flow_min_cut;
use crate::instance::Instance;
use crate::lp::FractionalSolution;
use crate::ratio::{rat, rat_int};
use num_rational::BigRational;
use num_traits::Zero;

/// Largest n for which the default construction enumerates all 2^(n-2)
/// candidate sides.
pub const CHAIN_ENUMERATION_CAP: usize = 20;

/// Float-provenance classification margin: cuts with value in
/// [2 - margin, 2) are treated as NOT narrow and counted as boundary cases.
/// Calling a ≥2 cut narrow could falsify the reassembly preconditions, while
/// dropping a genuinely narrow cut only weakens the guarantee.
pub fn float_classification_margin() -> BigRational {
    rat(1, 10_000_000)
}

#[derive(Clone, Debug)]
pub struct NarrowCutChain {
    /// U_0 .. U_ell, strictly nested.
    levels: Vec<BitSet>,
    /// x*(C_i) per level.
    values: Vec<BigRational>,
    /// δ(U_i) as edge sets.
    cut_edges: Vec<BitSet>,
    /// E[U_i] as edge sets.
    inner_edges: Vec<BitSet>,
    /// Cuts skipped by the classification margin.
    boundary_count: usize,
}

impl NarrowCutChain {
    /// ℓ: index of the last level.
    pub fn ell(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level(&self, i: usize) -> &BitSet {
        &self.levels[i]
    }

    pub fn value(&self, i: usize) -> &BigRational {
        &self.values[i]
    }

    pub fn cut_edge_set(&self, i: usize) -> &BitSet {
        &self.cut_edges[i]
    }

    pub fn inner_edge_set(&self, i: usize) -> &BitSet {
        &self.inner_edges[i]
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_count
    }

    /// (|U_i|, x*(C_i)) pairs for reporting.
    pub fn level_sizes_and_values(&self) -> Vec<(usize, BigRational)> {
        self.levels
            .iter()
            .zip(self.values.iter())
            .map(|(u, v)| (u.count(), v.clone()))
            .collect()
    }

    fn assemble(
        inst: &Instance,
        mut found: Vec<(BitSet, BigRational)>,
        boundary_count: usize,
    ) -> Result<Self> {
        found.sort_by_key(|(u, _)| (u.count(), u.to_vec()));
        let n = inst.n();
        let (s, t) = (inst.s(), inst.t());
        if found.is_empty() {
            return Err(Error::Cuts(
                "no narrow cuts found; x(δ(s)) = 1 < 2 always holds for feasible input".into(),
            ));
        }
        if found[0].0.to_vec() != vec![s] {
            return Err(Error::Cuts(format!(
                "first level is {:?}, expected {{s}}",
                found[0].0
            )));
        }
        if found[0].1 != rat_int(1) {
            return Err(Error::Cuts(format!(
                "x(δ(s)) = {}, expected exactly 1",
                found[0].1
            )));
        }
        let last = &found[found.len() - 1].0;
        let expect_last = BitSet::from_iter(n, (0..n).filter(|&v| v != t));
        if *last != expect_last {
            return Err(Error::Cuts("last level is not V∖{t}".into()));
        }
        for w in found.windows(2) {
            let (a, b) = (&w[0].0, &w[1].0);
            if !(a.is_subset(b) && a.count() < b.count()) {
                return Err(Error::Cuts(format!(
                    "narrow cuts do not form a chain: {:?} vs {:?} (infeasible input?)",
                    a, b
                )));
            }
        }
        let idx = inst.edge_index();
        let cut_edges = found.iter().map(|(u, _)| idx.cut_edges(u)).collect();
        let inner_edges = found.iter().map(|(u, _)| idx.inner_edges(u)).collect();
        let (levels, values) = found.into_iter().unzip();
        Ok(NarrowCutChain {
            levels,
            values,
            cut_edges,
            inner_edges,
            boundary_count,
        })
    }
}

#[derive(PartialEq)]
enum Classification {
    Narrow,
    Boundary,
    Wide,
}

fn classify(value: &BigRational, margin: &BigRational) -> Classification {
    let two = rat_int(2);
    if *value < two.clone() - margin.clone() {
        Classification::Narrow
    } else if *value < two {
        Classification::Boundary
    } else {
        Classification::Wide
    }
}

/// Exhaustive construction: every side U with s ∈ U, t ∉ U is tested.
/// An f64 prefilter skips the exact evaluation for clearly-wide cuts.
pub fn narrow_cuts_enumerate(
    sol: &FractionalSolution,
    inst: &Instance,
    margin: &BigRational,
) -> Result<NarrowCutChain> {
    let n = inst.n();
    if n > CHAIN_ENUMERATION_CAP {
        return Err(Error::Cuts(format!(
            "enumeration cap {CHAIN_ENUMERATION_CAP} exceeded (n = {n}); use the flow mode"
        )));
    }
    let idx = inst.edge_index();
    let (s, t) = (inst.s(), inst.t());
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let x_f: Vec<f64> = sol.x_f64();

    let mut found = Vec::new();
    let mut boundary = 0usize;
    for mask in 0..(1usize << others.len()) {
        let mut u_set = BitSet::from_iter(n, [s]);
        for (bit, &v) in others.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                u_set.insert(v);
            }
        }
        // cheap float value first
        let mut approx = 0.0f64;
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if x_f[e] != 0.0 && u_set.contains(a) != u_set.contains(b) {
                approx += x_f[e];
            }
        }
        if approx >= 2.0 + 1e-6 {
            continue;
        }
        let value = sol.cut_value(inst, &u_set);
        match classify(&value, margin) {
            Classification::Narrow => found.push((u_set, value)),
            Classification::Boundary => boundary += 1,
            Classification::Wide => {}
        }
    }
    NarrowCutChain::assemble(inst, found, boundary)
}

/// Flow-based construction. For u, v ∉ {s,t}, a narrow cut with u inside
/// and v outside exists iff the min cut between {s,u} and {t,v} is < 2;
/// that relation orders the vertices by their least chain level, and the
/// candidate levels are exactly the prefixes of the resulting groups
/// (smallest vertex set first on ties, which the rank ordering produces).
pub fn narrow_cuts_flow(
    sol: &FractionalSolution,
    inst: &Instance,
    margin: &BigRational,
) -> Result<NarrowCutChain> {
    let n = inst.n();
    let idx = inst.edge_index();
    let (s, t) = (inst.s(), inst.t());
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let two = rat_int(2);

    // before[a][b]: some narrow cut has others[a] inside, others[b] outside
    let k = others.len();
    let mut before = vec![vec![false; k]; k];
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let sources = BitSet::from_iter(n, [s, others[a]]);
            let sinks = BitSet::from_iter(n, [t, others[b]]);
            let res = max_flow_min_cut(idx, &sol.x, &sources, &sinks);
            if res.value < two {
                before[a][b] = true;
            }
        }
    }
    // consistency: the relation must be the strict part of a total preorder
    for a in 0..k {
        for b in 0..k {
            if a != b && before[a][b] && before[b][a] {
                return Err(Error::Cuts(format!(
                    "vertices {} and {} separate each other; narrow cuts cannot form a chain (infeasible input?)",
                    others[a], others[b]
                )));
            }
        }
    }
    // rank = number of vertices strictly before; equal rank = same group
    let mut ranked: Vec<(usize, usize)> = (0..k)
        .map(|a| ((0..k).filter(|&b| before[b][a]).count(), others[a]))
        .collect();
    ranked.sort();

    // candidate levels: prefixes of the rank groups
    let mut found = Vec::new();
    let mut boundary = 0usize;
    let mut u_set = BitSet::from_iter(n, [s]);
    let consider = |u_set: &BitSet, found: &mut Vec<_>, boundary: &mut usize| {
        let value = sol.cut_value(inst, u_set);
        match classify(&value, margin) {
            Classification::Narrow => found.push((u_set.clone(), value)),
            Classification::Boundary => *boundary += 1,
            Classification::Wide => {}
        }
    };
    consider(&u_set, &mut found, &mut boundary);
    let mut i = 0;
    while i < ranked.len() {
        let rank = ranked[i].0;
        while i < ranked.len() && ranked[i].0 == rank {
            u_set.insert(ranked[i].1);
            i += 1;
        }
        consider(&u_set, &mut found, &mut boundary);
    }
    NarrowCutChain::assemble(inst, found, boundary)
}

/// Default construction: exact enumeration up to the cap, flows beyond.
/// The margin is zero: `sol` carries exact values.
pub fn narrow_cuts(sol: &FractionalSolution, inst: &Instance) -> Result<NarrowCutChain> {
    let zero = BigRational::zero();
    if inst.n() <= CHAIN_ENUMERATION_CAP {
        narrow_cuts_enumerate(sol, inst, &zero)
    } else {
        narrow_cuts_flow(sol, inst, &zero)
    }
}
