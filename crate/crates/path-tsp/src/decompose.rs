//! Writing a feasible x as a convex combination of spanning trees, and
//! rounding that combination to a uniform-weight multiset.
//!
//! The decomposition runs column generation in exact rational arithmetic:
//! the master LP matches the tree pool to x (plus a convexity row), and the
//! pricing step is a maximum-weight spanning tree under the master duals.
//! A stall with positive residual certifies that x lies outside the
//! spanning-tree polytope, in which case a violated rank inequality
//! x(E[U]) ≤ |U|-1 is located and reported.
//!
//! Rounding snaps the requested ε down so that N = n³/ε is an integer,
//! keeps 2⌊N·p_S⌋ copies of each tree (multiplicities, never materialized
//! copy by copy), and collects the clipped weight as the leftover
//! sub-distribution. The renormalized vector x then satisfies
//! x(δ(s)) = x(δ(t)) = 1 and |x(F) - x*(F)| ≤ ε for every edge set F.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::graph::EdgeIndex;
use crate::instance::Instance;
use crate::ratio::{rat_int, rat_to_string};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeDistribution {
    /// (spanning tree edge set, positive weight), in deterministic order.
    pub blocks: Vec<(BitSet, BigRational)>,
}

impl TreeDistribution {
    pub fn total(&self) -> BigRational {
        self.blocks.iter().map(|(_, w)| w.clone()).sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Σ weight · χ^S as a dense edge vector.
    pub fn edge_vector(&self, m: usize) -> Vec<BigRational> {
        let mut acc = vec![BigRational::zero(); m];
        for (tree, w) in &self.blocks {
            for e in tree.iter() {
                acc[e] += w;
            }
        }
        acc
    }

    pub fn to_json(&self, idx: &EdgeIndex) -> String {
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|(tree, w)| {
                let edges: Vec<[usize; 2]> = tree
                    .iter()
                    .map(|e| {
                        let (u, v) = idx.ends(e);
                        [u, v]
                    })
                    .collect();
                serde_json::json!({
                    "edges": edges,
                    "weight_num": w.numer().to_string(),
                    "weight_den": w.denom().to_string(),
                })
            })
            .collect();
        serde_json::to_string_pretty(&blocks).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str, idx: &EdgeIndex) -> Result<Self> {
        let raw: Vec<serde_json::Value> = serde_json::from_str(text)?;
        let mut blocks = Vec::new();
        for item in raw {
            let edges = item
                .get("edges")
                .and_then(|e| e.as_array())
                .ok_or_else(|| Error::Parse("missing edges".into()))?;
            let mut tree = idx.empty_edges();
            for pair in edges {
                let u = pair[0].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                let v = pair[1].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
                tree.insert(idx.id(u, v));
            }
            let num: BigInt = item
                .get("weight_num")
                .and_then(|v| v.as_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse("bad weight_num".into()))?;
            let den: BigInt = item
                .get("weight_den")
                .and_then(|v| v.as_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse("bad weight_den".into()))?;
            blocks.push((tree, BigRational::new(num, den)));
        }
        Ok(TreeDistribution { blocks })
    }
}

/// True iff all weights are positive, all trees are spanning trees, and
/// Σ weight·χ^S matches x within `tol` on every edge (exactly when tol=0).
pub fn verify_combination(
    dist: &TreeDistribution,
    x: &[BigRational],
    idx: &EdgeIndex,
    tol: &BigRational,
) -> bool {
    for (tree, w) in &dist.blocks {
        if !w.is_positive() || !idx.is_spanning_tree(tree) {
            return false;
        }
    }
    let acc = dist.edge_vector(idx.m());
    acc.iter().zip(x.iter()).all(|(a, b)| (a - b).abs() <= *tol)
}

/// Deterministic maximum-weight spanning tree over `allowed` edges
/// (Kruskal; ties by lowest edge id). None if `allowed` does not span.
fn max_weight_spanning_tree(
    idx: &EdgeIndex,
    allowed: &[usize],
    weight: impl Fn(usize) -> BigRational,
) -> Option<BitSet> {
    let mut keyed: Vec<(BigRational, usize)> = allowed.iter().map(|&e| (weight(e), e)).collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut uf = crate::graph::UnionFind::new(idx.n());
    let mut tree = idx.empty_edges();
    let mut picked = 0;
    for (_, e) in keyed {
        let (u, v) = idx.ends(e);
        if uf.union(u, v) {
            tree.insert(e);
            picked += 1;
            if picked == idx.n() - 1 {
                return Some(tree);
            }
        }
    }
    None
}

/// Locate a violated rank inequality x(E[U]) > |U|-1 by exhaustive search
/// (f64 prefilter, exact confirmation). Only called on the error path.
fn find_rank_violation(x: &[BigRational], idx: &EdgeIndex) -> Option<(BitSet, BigRational)> {
    let n = idx.n();
    if n > 20 {
        return None;
    }
    let x_f: Vec<f64> = x.iter().map(crate::ratio::rat_to_f64).collect();
    let mut worst: Option<(BitSet, BigRational)> = None;
    for mask in 1usize..(1 << n) {
        let u_set = BitSet::from_iter(n, (0..n).filter(|&v| mask >> v & 1 == 1));
        let size = u_set.count();
        let mut approx = 0.0;
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if u_set.contains(a) && u_set.contains(b) {
                approx += x_f[e];
            }
        }
        if approx <= (size as f64 - 1.0) + 1e-6 {
            continue;
        }
        let mut inner = BigRational::zero();
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if u_set.contains(a) && u_set.contains(b) {
                inner += &x[e];
            }
        }
        let slack = inner.clone() - rat_int(size as i64 - 1);
        if slack.is_positive() {
            match &worst {
                None => worst = Some((u_set, inner)),
                Some((w, prev)) => {
                    let prev_slack = prev.clone() - rat_int(w.count() as i64 - 1);
                    if slack > prev_slack {
                        worst = Some((u_set, inner));
                    }
                }
            }
        }
    }
    worst
}

fn rank_error(x: &[BigRational], idx: &EdgeIndex) -> Error {
    match find_rank_violation(x, idx) {
        Some((u_set, inner)) => Error::RankViolation {
            rhs: (u_set.count() - 1).to_string(),
            u_set: u_set.to_vec(),
            lhs: rat_to_string(&inner),
        },
        None => Error::Decompose(
            "x is outside the spanning-tree polytope (no explicit rank certificate for n > 20)"
                .into(),
        ),
    }
}

const MAX_PRICING_ROUNDS_FACTOR: usize = 60;

/// Write a feasible x as a convex combination of spanning trees with at
/// most n(n-1)/2 + 1 blocks.
pub fn decompose(x: &[BigRational], inst: &Instance) -> Result<TreeDistribution> {
    let idx = inst.edge_index();
    let n = inst.n();
    let m = idx.m();
    if x.len() != m {
        return Err(Error::Decompose(format!(
            "edge vector has {} entries, expected {m}",
            x.len()
        )));
    }
    if let Some(e) = x.iter().position(|v| v.is_negative()) {
        return Err(Error::Decompose(format!("negative entry at edge {e}")));
    }
    let total: BigRational = x.iter().cloned().sum();
    if total != rat_int(n as i64 - 1) {
        return Err(Error::Decompose(format!(
            "x(E) = {} but a convex combination of spanning trees needs exactly n-1 = {}",
            total,
            n - 1
        )));
    }

    let support: Vec<usize> = (0..m).filter(|&e| x[e].is_positive()).collect();
    let Some(first_tree) = max_weight_spanning_tree(idx, &support, |e| x[e].clone()) else {
        return Err(rank_error(x, idx));
    };

    // Master: per-edge equality rows matching x, plus the convexity row.
    let mut rows = Vec::with_capacity(m + 1);
    for xe in x {
        rows.push(crate::simplex::Constraint {
            coeffs: vec![],
            rel: crate::simplex::Rel::Eq,
            rhs: xe.clone(),
        });
    }
    rows.push(crate::simplex::Constraint {
        coeffs: vec![],
        rel: crate::simplex::Rel::Eq,
        rhs: BigRational::one(),
    });
    let mut master = crate::simplex::Tableau::new(Vec::new(), rows);

    let tree_column = |tree: &BitSet| -> Vec<BigRational> {
        let mut col = vec![BigRational::zero(); m + 1];
        for e in tree.iter() {
            col[e] = BigRational::one();
        }
        col[m] = BigRational::one();
        col
    };

    let mut pool: Vec<(BitSet, usize)> = Vec::new(); // (tree, column index)
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    seen.insert(first_tree.to_vec());
    let col = master.add_column(&tree_column(&first_tree), BigRational::zero());
    pool.push((first_tree, col));

    let max_rounds = MAX_PRICING_ROUNDS_FACTOR * (m + 2);
    for _round in 0..max_rounds {
        let residual = master.phase1()?;
        if residual.is_zero() {
            let mut blocks = Vec::new();
            for (tree, col) in &pool {
                let w = master.primal(*col);
                if w.is_positive() {
                    blocks.push((tree.clone(), w));
                }
            }
            let dist = prune_caratheodory(TreeDistribution { blocks }, idx);
            debug_assert!(verify_combination(&dist, x, idx, &BigRational::zero()));
            if dist.len() > m + 1 {
                return Err(Error::Decompose(format!(
                    "{} blocks exceed the Caratheodory bound {}",
                    dist.len(),
                    m + 1
                )));
            }
            return Ok(dist);
        }
        // Pricing: max-weight spanning tree under the phase-1 duals.
        let duals = master.duals(true);
        let sigma = duals[m].clone();
        let Some(tree) = max_weight_spanning_tree(idx, &support, |e| duals[e].clone()) else {
            return Err(rank_error(x, idx));
        };
        let tree_weight: BigRational = tree.iter().map(|e| duals[e].clone()).sum();
        if !(tree_weight + sigma).is_positive() {
            // No improving column exists: x is not in the polytope.
            return Err(rank_error(x, idx));
        }
        if !seen.insert(tree.to_vec()) {
            return Err(Error::Decompose(
                "pricing returned a duplicate column; master LP inconsistent".into(),
            ));
        }
        let col = master.add_column(&tree_column(&tree), BigRational::zero());
        pool.push((tree, col));
    }
    Err(Error::Decompose(format!(
        "column generation did not converge within {max_rounds} rounds"
    )))
}

/// Remove affinely dependent blocks: while a nonzero α with
/// Σ α_S χ^S = 0 and Σ α_S = 0 exists, walk to the boundary and drop the
/// block whose weight hits zero. Output reproduces the same edge vector.
pub fn prune_caratheodory(dist: TreeDistribution, idx: &EdgeIndex) -> TreeDistribution {
    let m = idx.m();
    let mut blocks = dist.blocks;
    loop {
        if blocks.len() <= 1 {
            return TreeDistribution { blocks };
        }
        let cols: Vec<Vec<BigRational>> = blocks
            .iter()
            .map(|(tree, _)| {
                let mut col = vec![BigRational::zero(); m + 1];
                for e in tree.iter() {
                    col[e] = BigRational::one();
                }
                col[m] = BigRational::one();
                col
            })
            .collect();
        let Some(mut alpha) = null_space_vector(&cols, m + 1) else {
            return TreeDistribution { blocks };
        };
        if !alpha.iter().any(|a| a.is_positive()) {
            for a in alpha.iter_mut() {
                *a = -a.clone();
            }
        }
        // Largest step keeping all weights nonnegative: t = min w_k/α_k
        // over α_k > 0; the arg-min block drops out.
        let mut t: Option<BigRational> = None;
        for (k, a) in alpha.iter().enumerate() {
            if a.is_positive() {
                let ratio = blocks[k].1.clone() / a.clone();
                if t.as_ref().is_none_or(|cur| ratio < *cur) {
                    t = Some(ratio);
                }
            }
        }
        let t = t.expect("alpha has a positive entry");
        let mut next = Vec::with_capacity(blocks.len() - 1);
        for (k, (tree, w)) in blocks.into_iter().enumerate() {
            let w2 = w - t.clone() * alpha[k].clone();
            debug_assert!(!w2.is_negative());
            if w2.is_positive() {
                next.push((tree, w2));
            }
        }
        blocks = next;
    }
}

/// A nonzero vector in the null space of the (rows × cols) matrix given
/// column-wise, or None if the columns are linearly independent.
fn null_space_vector(cols: &[Vec<BigRational>], rows: usize) -> Option<Vec<BigRational>> {
    let k = cols.len();
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| (0..k).map(|c| cols[c][r].clone()).collect())
        .collect();
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let inv = BigRational::one() / a[r][c].clone();
        for v in a[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..k {
                    if !a[r][j].is_zero() {
                        a[i][j] = a[i][j].clone() - f.clone() * a[r][j].clone();
                    }
                }
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let pivot_cols: BTreeSet<usize> = pivot_col_of_row.iter().copied().collect();
    let free = (0..k).find(|c| !pivot_cols.contains(c))?;
    let mut alpha = vec![BigRational::zero(); k];
    alpha[free] = BigRational::one();
    for (row, &pc) in pivot_col_of_row.iter().enumerate() {
        // pivot var = -coefficient of the free column in its row
        alpha[pc] = -a[row][free].clone();
    }
    Some(alpha)
}

/// The rounded multiset: every weight an integral multiple of 1/r, stored
/// as (tree, multiplicity) blocks.
#[derive(Clone, Debug)]
pub struct RoundedEnsemble {
    /// (tree, multiplicity), multiplicities summing to r.
    pub blocks: Vec<(BitSet, u64)>,
    /// Number of virtual trees; always even.
    pub r: u64,
    /// The snapped rounding parameter (0 in exact mode).
    pub epsilon: BigRational,
    /// p'': the weight clipped off by rounding, total ≤ ε/n.
    pub leftover: TreeDistribution,
    /// The renormalized rounded vector x = Σ p'_S χ^S / Σ p'_S.
    pub x: Vec<BigRational>,
    /// Σ p'.
    pub sum_p_prime: BigRational,
}

impl RoundedEnsemble {
    pub fn multiplicity_total(&self) -> u64 {
        self.blocks.iter().map(|(_, mult)| mult).sum()
    }
}

fn endpoint_degrees_ok(dist: &TreeDistribution, inst: &Instance) -> Result<()> {
    let idx = inst.edge_index();
    for (tree, _) in &dist.blocks {
        for v in [inst.s(), inst.t()] {
            let d = idx.degree_in(tree, v);
            if d != 1 {
                return Err(Error::StructureViolation(format!(
                    "a decomposition tree has degree {d} at endpoint {v}; \
                     exact convex combinations of a feasible x force degree 1"
                )));
            }
        }
    }
    Ok(())
}

/// Round a distribution (total exactly 1) down to integer multiples of
/// ε/n³, after snapping ε to the largest value ≤ the request with n³/ε
/// integral. Each tree S keeps 2⌊(n³/ε)·p_S⌋ virtual copies.
pub fn round_distribution(
    dist: &TreeDistribution,
    eps_request: &BigRational,
    inst: &Instance,
) -> Result<RoundedEnsemble> {
    if !eps_request.is_positive() {
        return Err(Error::Rounding("ε must be positive".into()));
    }
    if dist.total() != BigRational::one() {
        return Err(Error::Rounding(format!(
            "distribution total is {}, expected exactly 1",
            dist.total()
        )));
    }
    endpoint_degrees_ok(dist, inst)?;
    let n = inst.n();
    let idx = inst.edge_index();
    let n3 = rat_int((n * n * n) as i64);
    // snap: N = ceil(n³/ε_request), ε = n³/N ≤ ε_request
    let big_n: BigInt = (n3.clone() / eps_request.clone()).ceil().to_integer();
    let big_n = big_n.max(BigInt::one());
    let epsilon = n3 / BigRational::from_integer(big_n.clone());

    let mut blocks = Vec::new();
    let mut leftover = Vec::new();
    let mut sum_q = BigInt::zero();
    for (tree, p) in &dist.blocks {
        let q: BigInt = (p * BigRational::from_integer(big_n.clone()))
            .floor()
            .to_integer();
        let p_prime = BigRational::new(q.clone(), big_n.clone());
        let p_second = p - &p_prime;
        if q.is_positive() {
            let mult: u64 = (q.clone() * BigInt::from(2))
                .to_u64()
                .ok_or_else(|| Error::Rounding("multiplicity exceeds u64".into()))?;
            blocks.push((tree.clone(), mult));
            sum_q += q;
        }
        if p_second.is_positive() {
            leftover.push((tree.clone(), p_second));
        }
    }
    if sum_q.is_zero() {
        return Err(Error::Rounding(
            "every weight rounded to zero; request a smaller ε".into(),
        ));
    }
    let r_big = sum_q.clone() * BigInt::from(2);
    let r: u64 = r_big
        .to_u64()
        .ok_or_else(|| Error::Rounding("r exceeds u64".into()))?;
    let sum_p_prime = BigRational::new(sum_q, big_n.clone());
    let leftover = TreeDistribution { blocks: leftover };

    // leftover total = 1 - Σp'; the support bound (< n² trees) makes it ≤ ε/n
    let leftover_total = leftover.total();
    if leftover_total != BigRational::one() - &sum_p_prime {
        return Err(Error::Rounding("leftover bookkeeping mismatch".into()));
    }
    let eps_over_n = epsilon.clone() / rat_int(n as i64);
    if leftover_total > eps_over_n {
        return Err(Error::Rounding(format!(
            "Σp'' = {leftover_total} exceeds ε/n = {eps_over_n}; support larger than the bound allows"
        )));
    }

    // x = Σ p'_S χ^S / Σp'
    let mut x = vec![BigRational::zero(); idx.m()];
    let r_rat = rat_int(r as i64);
    for (tree, mult) in &blocks {
        let w = rat_int(*mult as i64) / r_rat.clone();
        for e in tree.iter() {
            x[e] += &w;
        }
    }
    check_rounded_properties(&x, inst, &epsilon, &leftover_total)?;

    Ok(RoundedEnsemble {
        blocks,
        r,
        epsilon,
        leftover,
        x,
        sum_p_prime,
    })
}

/// Exact-mode ensemble (ε = 0): requires all weights to share a small
/// common denominator D; r = 2D and nothing is lost to rounding.
pub fn exact_ensemble(
    dist: &TreeDistribution,
    den_cap: u64,
    inst: &Instance,
) -> Result<RoundedEnsemble> {
    if dist.total() != BigRational::one() {
        return Err(Error::Rounding(format!(
            "distribution total is {}, expected exactly 1",
            dist.total()
        )));
    }
    endpoint_degrees_ok(dist, inst)?;
    let idx = inst.edge_index();
    let mut lcm = BigInt::one();
    for (_, w) in &dist.blocks {
        lcm = lcm.lcm(w.denom());
    }
    let d = lcm.to_u64().filter(|&d| d <= den_cap).ok_or_else(|| {
        Error::Rounding(format!(
            "common denominator {lcm} exceeds the exact-mode cap {den_cap}; \
             run with a positive ε instead"
        ))
    })?;
    let mut blocks = Vec::new();
    for (tree, w) in &dist.blocks {
        let q = (w * BigRational::from_integer(BigInt::from(d))).to_integer();
        let mult = 2 * q.to_u64().expect("bounded by 2·den_cap");
        blocks.push((tree.clone(), mult));
    }
    let r = 2 * d;
    let x = dist.edge_vector(idx.m());
    check_rounded_properties(&x, inst, &BigRational::zero(), &BigRational::zero())?;
    Ok(RoundedEnsemble {
        blocks,
        r,
        epsilon: BigRational::zero(),
        leftover: TreeDistribution { blocks: vec![] },
        x,
        sum_p_prime: BigRational::one(),
    })
}

/// The rounded vector's required properties: unit degree at both endpoints
/// and the sup-norm bound |x(F) - x*(F)| ≤ ε for every F ⊆ E, certified
/// via Σp''·(n-1)/(1-Σp'') ≤ ε (|S∩F| ≤ n-1 makes that bound F-free).
fn check_rounded_properties(
    x: &[BigRational],
    inst: &Instance,
    epsilon: &BigRational,
    leftover_total: &BigRational,
) -> Result<()> {
    let idx = inst.edge_index();
    for v in [inst.s(), inst.t()] {
        let mut deg = BigRational::zero();
        for w in 0..inst.n() {
            if w != v {
                deg += &x[idx.id(v, w)];
            }
        }
        if deg != BigRational::one() {
            return Err(Error::Rounding(format!(
                "rounded x has degree {deg} at endpoint {v}, expected exactly 1"
            )));
        }
    }
    let one = BigRational::one();
    if *leftover_total >= one {
        return Err(Error::Rounding("leftover consumed everything".into()));
    }
    let bound =
        leftover_total.clone() * rat_int(inst.n() as i64 - 1) / (one - leftover_total.clone());
    if bound > *epsilon {
        return Err(Error::Rounding(format!(
            "sup-norm bound {bound} exceeds ε = {epsilon}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, MetricKind};
    use crate::lp::{solve_relaxation, ArithMode};
    use crate::ratio::rat;

    fn tree_of(inst: &Instance, pairs: &[(usize, usize)]) -> BitSet {
        let idx = inst.edge_index();
        let mut t = idx.empty_edges();
        for (u, v) in pairs {
            t.insert(idx.id(*u, *v));
        }
        t
    }

    #[test]
    fn indicator_gives_single_block() {
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let mut x = vec![BigRational::zero(); idx.m()];
        for e in tree.iter() {
            x[e] = BigRational::one();
        }
        let dist = decompose(&x, &inst).unwrap();
        assert_eq!(dist.len(), 1);
        assert_eq!(dist.blocks[0].0, tree);
        assert_eq!(dist.blocks[0].1, BigRational::one());
    }

    #[test]
    fn halves_of_two_trees() {
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let t1 = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let t2 = tree_of(&inst, &[(0, 2), (2, 1), (1, 3)]);
        let mut x = vec![BigRational::zero(); idx.m()];
        for e in t1.iter() {
            x[e] += rat(1, 2);
        }
        for e in t2.iter() {
            x[e] += rat(1, 2);
        }
        let dist = decompose(&x, &inst).unwrap();
        assert!(verify_combination(&dist, &x, idx, &BigRational::zero()));
        assert!(dist.len() >= 2);
    }

    #[test]
    fn wrong_total_rejected() {
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let mut x = vec![BigRational::zero(); idx.m()];
        x[idx.id(0, 1)] = BigRational::one();
        x[idx.id(1, 2)] = BigRational::one();
        x[idx.id(2, 3)] = rat(1, 2);
        let err = decompose(&x, &inst).unwrap_err();
        assert!(err.to_string().contains("n-1"));
    }

    #[test]
    fn rank_violation_reported() {
        // x(E) = 3 but concentrated on a triangle: x(E[{0,1,2}]) = 3 > 2
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let mut x = vec![BigRational::zero(); idx.m()];
        x[idx.id(0, 1)] = BigRational::one();
        x[idx.id(1, 2)] = BigRational::one();
        x[idx.id(0, 2)] = BigRational::one();
        match decompose(&x, &inst) {
            Err(Error::RankViolation { u_set, .. }) => assert_eq!(u_set, vec![0, 1, 2]),
            other => panic!("expected rank violation, got {other:?}"),
        }
    }

    #[test]
    fn verifier_rejects_tampering() {
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let t1 = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let mut x = vec![BigRational::zero(); idx.m()];
        for e in t1.iter() {
            x[e] = BigRational::one();
        }
        let dist = decompose(&x, &inst).unwrap();

        let mut perturbed = dist.clone();
        perturbed.blocks[0].1 += rat(1, 1000);
        assert!(!verify_combination(&perturbed, &x, idx, &BigRational::zero()));

        let mut forest = dist.clone();
        let mut bad_tree = t1.clone();
        bad_tree.remove(idx.id(1, 2));
        bad_tree.remove(idx.id(2, 3));
        bad_tree.insert(idx.id(0, 2)); // {01, 02}: not spanning
        forest.blocks[0].0 = bad_tree;
        assert!(!verify_combination(&forest, &x, idx, &BigRational::zero()));
    }

    #[test]
    fn lp_solutions_decompose_and_roundtrip() {
        for seed in [3u64, 7, 21] {
            for kind in [MetricKind::Euclidean, MetricKind::RandomClosure] {
                let inst = Instance::random(seed, 7, kind).unwrap();
                let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
                let dist = decompose(&sol.x, &inst).unwrap();
                let idx = inst.edge_index();
                assert!(verify_combination(&dist, &sol.x, idx, &BigRational::zero()));
                assert!(dist.len() <= idx.m() + 1);
                assert_eq!(dist.total(), BigRational::one());
                // serialization round trip
                let json = dist.to_json(idx);
                let back = TreeDistribution::from_json(&json, idx).unwrap();
                assert_eq!(back, dist);
            }
        }
    }

    #[test]
    fn prune_removes_dependent_blocks() {
        // χ^{T1} + χ^{T2} = χ^{T3} + χ^{T4}: four blocks at weight 1/4 carry
        // an affine dependency; pruning must shrink the support and keep x.
        let inst = Instance::line(4);
        let idx = inst.edge_index();
        let t1 = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let t2 = tree_of(&inst, &[(0, 1), (0, 2), (0, 3)]);
        let t3 = tree_of(&inst, &[(0, 1), (1, 2), (0, 3)]);
        let t4 = tree_of(&inst, &[(0, 1), (0, 2), (2, 3)]);
        let dist = TreeDistribution {
            blocks: vec![
                (t1, rat(1, 4)),
                (t2, rat(1, 4)),
                (t3, rat(1, 4)),
                (t4, rat(1, 4)),
            ],
        };
        let x = dist.edge_vector(idx.m());
        let pruned = prune_caratheodory(dist, idx);
        assert!(pruned.len() < 4);
        assert!(verify_combination(&pruned, &x, idx, &BigRational::zero()));
        assert_eq!(pruned.total(), BigRational::one());
    }

    #[test]
    fn round_single_block() {
        // single tree, n=4, ε = 1/64: N = 4096, r = 8192, no leftover
        let inst = Instance::line(4);
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let dist = TreeDistribution {
            blocks: vec![(tree.clone(), BigRational::one())],
        };
        let ens = round_distribution(&dist, &rat(1, 64), &inst).unwrap();
        assert_eq!(ens.r, 8192);
        assert_eq!(ens.blocks.len(), 1);
        assert_eq!(ens.blocks[0].1, 8192);
        assert!(ens.leftover.is_empty());
        assert_eq!(ens.epsilon, rat(1, 64));
        assert_eq!(ens.sum_p_prime, BigRational::one());
    }

    #[test]
    fn round_aligned_thirds() {
        // weights 2/3 and 1/3 with N = n³/ε = 3: exact, leftover empty
        let inst = Instance::line(4);
        let t1 = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let t2 = tree_of(&inst, &[(0, 2), (1, 2), (1, 3)]);
        let dist = TreeDistribution {
            blocks: vec![(t1, rat(2, 3)), (t2, rat(1, 3))],
        };
        let ens = round_distribution(&dist, &rat(64, 3), &inst).unwrap();
        assert_eq!(ens.epsilon, rat(64, 3));
        assert_eq!(ens.r, 6);
        assert_eq!(ens.blocks[0].1, 4);
        assert_eq!(ens.blocks[1].1, 2);
        assert!(ens.leftover.is_empty());
    }

    #[test]
    fn leftover_bounded_by_eps_over_n() {
        for seed in [2u64, 13] {
            let inst = Instance::random(seed, 7, MetricKind::Euclidean).unwrap();
            let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
            let dist = decompose(&sol.x, &inst).unwrap();
            let eps = rat(1, 2);
            let ens = round_distribution(&dist, &eps, &inst).unwrap();
            let n = rat_int(7);
            assert!(ens.leftover.total() <= ens.epsilon.clone() / n);
            assert!(ens.epsilon <= eps);
            assert_eq!(ens.multiplicity_total(), ens.r);
            assert_eq!(ens.r % 2, 0);
        }
    }

    #[test]
    fn exact_mode_keeps_everything() {
        let inst = Instance::random(4, 6, MetricKind::GraphMetric).unwrap();
        let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
        let dist = decompose(&sol.x, &inst).unwrap();
        match exact_ensemble(&dist, 1_000_000, &inst) {
            Ok(ens) => {
                assert_eq!(ens.epsilon, BigRational::zero());
                assert!(ens.leftover.is_empty());
                assert_eq!(ens.x, sol.x);
                assert_eq!(ens.r % 2, 0);
            }
            Err(Error::Rounding(msg)) => {
                panic!("denominators should be small on this instance: {msg}")
            }
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn exact_mode_denominator_cap() {
        let inst = Instance::line(4);
        let t1 = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let t2 = tree_of(&inst, &[(0, 2), (1, 2), (1, 3)]);
        let dist = TreeDistribution {
            blocks: vec![(t1, rat(1, 1_000_003)), (t2, rat(1_000_002, 1_000_003))],
        };
        assert!(exact_ensemble(&dist, 1000, &inst).is_err());
    }

    #[test]
    fn zero_epsilon_rejected_by_rounding() {
        let inst = Instance::line(4);
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (2, 3)]);
        let dist = TreeDistribution {
            blocks: vec![(tree, BigRational::one())],
        };
        assert!(round_distribution(&dist, &BigRational::zero(), &inst).is_err());
    }
}
