//! Parity correction: find the vertices where a tree has the wrong degree
//! parity, fix them with a minimum T-join, and shortcut the Eulerian walk
//! of tree ⊎ join into a Hamiltonian s-t path.
//!
//! On a complete metric the minimum T-join is a minimum-cost perfect
//! matching on T, computed by bitmask DP over subsets. The DP runs on
//! lcm-scaled integer costs when they fit a machine word and falls back to
//! exact rationals otherwise; either way the final cost is recomputed
//! exactly from the chosen pairs.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::instance::{HamPath, Instance};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Default cap on |T| for the matching DP (2^22 subset states).
pub const MATCHING_CAP: usize = 22;

/// Vertices whose degree parity in `tree` is wrong: even degree at s or t,
/// odd degree elsewhere.
pub fn wrong_parity_set(inst: &Instance, tree: &BitSet) -> BitSet {
    let idx = inst.edge_index();
    let mut t_set = BitSet::new(inst.n());
    for v in 0..inst.n() {
        let odd = idx.degree_in(tree, v) % 2 == 1;
        let endpoint = v == inst.s() || v == inst.t();
        if odd != endpoint {
            t_set.insert(v);
        }
    }
    debug_assert_eq!(t_set.count() % 2, 0, "handshake parity");
    t_set
}

/// A T-join given as vertex pairs (a perfect matching on T) with its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct TJoin {
    pub pairs: Vec<(usize, usize)>,
    pub cost: BigRational,
}

impl TJoin {
    pub fn edge_ids(&self, inst: &Instance) -> Vec<usize> {
        let idx = inst.edge_index();
        self.pairs.iter().map(|&(a, b)| idx.id(a, b)).collect()
    }
}

/// Minimum T-join as a minimum perfect matching on T (valid on a complete
/// metric). Bitmask DP, deterministic tie-breaks.
pub fn min_tjoin(inst: &Instance, t_set: &BitSet, cap: usize) -> Result<TJoin> {
    let verts = t_set.to_vec();
    let k = verts.len();
    if k % 2 != 0 {
        return Err(Error::Parity(format!("|T| = {k} is odd")));
    }
    if k > cap {
        return Err(Error::Parity(format!("|T| = {k} exceeds matching cap {cap}")));
    }
    if k == 0 {
        return Ok(TJoin {
            pairs: vec![],
            cost: BigRational::zero(),
        });
    }

    // Scale pair costs to integers when they fit; exact either way.
    let mut den_lcm = BigInt::one();
    for i in 0..k {
        for j in (i + 1)..k {
            den_lcm = den_lcm.lcm(inst.cost(verts[i], verts[j]).denom());
        }
    }
    let scale = BigRational::from_integer(den_lcm);
    let mut scaled = vec![0i64; k * k];
    let mut fits = true;
    'outer: for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let v = (inst.cost(verts[i], verts[j]) * &scale).to_integer();
            match v.to_i64() {
                Some(w) if w < i64::MAX / (k as i64 + 1) => scaled[i * k + j] = w,
                _ => {
                    fits = false;
                    break 'outer;
                }
            }
        }
    }

    let pair_indices = if fits {
        matching_dp(k, |i, j| scaled[i * k + j])
    } else {
        matching_dp_rational(inst, &verts)
    };

    let pairs: Vec<(usize, usize)> = pair_indices
        .into_iter()
        .map(|(i, j)| (verts[i], verts[j]))
        .collect();
    let cost = pairs.iter().map(|&(a, b)| inst.cost(a, b).clone()).sum();
    Ok(TJoin { pairs, cost })
}

/// DP over subsets with integer weights. Pairs the lowest unmatched index
/// against every candidate; first minimum wins (deterministic).
fn matching_dp(k: usize, w: impl Fn(usize, usize) -> i64) -> Vec<(usize, usize)> {
    let full = (1usize << k) - 1;
    let mut dp = vec![i64::MAX; 1 << k];
    let mut choice = vec![(0u8, 0u8); 1 << k];
    dp[0] = 0;
    for mask in 1..=full {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = i64::MAX;
        let mut pick = 0usize;
        let mut sub = rest;
        while sub != 0 {
            let j = sub.trailing_zeros() as usize;
            sub &= sub - 1;
            let prev = dp[rest & !(1 << j)];
            if prev == i64::MAX {
                continue;
            }
            let cand = prev + w(i, j);
            if cand < best {
                best = cand;
                pick = j;
            }
        }
        dp[mask] = best;
        choice[mask] = (i as u8, pick as u8);
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((i as usize, j as usize));
        mask &= !(1 << i);
        mask &= !(1 << j);
    }
    pairs.reverse();
    pairs
}

/// Rational fallback for the rare case of oversized scaled weights.
fn matching_dp_rational(inst: &Instance, verts: &[usize]) -> Vec<(usize, usize)> {
    let k = verts.len();
    let full = (1usize << k) - 1;
    let mut dp: Vec<Option<BigRational>> = vec![None; 1 << k];
    let mut choice = vec![(0u8, 0u8); 1 << k];
    dp[0] = Some(BigRational::zero());
    for mask in 1..=full {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best: Option<BigRational> = None;
        let mut pick = 0usize;
        let mut sub = rest;
        while sub != 0 {
            let j = sub.trailing_zeros() as usize;
            sub &= sub - 1;
            let Some(prev) = &dp[rest & !(1 << j)] else {
                continue;
            };
            let cand = prev.clone() + inst.cost(verts[i], verts[j]);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
                pick = j;
            }
        }
        dp[mask] = best;
        choice[mask] = (i as u8, pick as u8);
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((i as usize, j as usize));
        mask &= !(1 << i);
        mask &= !(1 << j);
    }
    pairs.reverse();
    pairs
}

/// Exhaustive oracle: enumerate every perfect matching on T (practical for
/// |T| ≤ 8, i.e. 105 matchings) and return a cheapest one.
pub fn min_tjoin_brute(inst: &Instance, t_set: &BitSet) -> Result<TJoin> {
    let verts = t_set.to_vec();
    if verts.len() % 2 != 0 {
        return Err(Error::Parity(format!("|T| = {} is odd", verts.len())));
    }
    fn recurse(
        inst: &Instance,
        remaining: &mut Vec<usize>,
        current: &mut Vec<(usize, usize)>,
        cost: BigRational,
        best: &mut Option<(BigRational, Vec<(usize, usize)>)>,
    ) {
        if remaining.is_empty() {
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                *best = Some((cost, current.clone()));
            }
            return;
        }
        let a = remaining.remove(0);
        for idx in 0..remaining.len() {
            let b = remaining.remove(idx);
            current.push((a, b));
            recurse(
                inst,
                remaining,
                current,
                cost.clone() + inst.cost(a, b),
                best,
            );
            current.pop();
            remaining.insert(idx, b);
        }
        remaining.insert(0, a);
    }
    let mut best = None;
    let mut remaining = verts;
    recurse(
        inst,
        &mut remaining,
        &mut Vec::new(),
        BigRational::zero(),
        &mut best,
    );
    let (cost, pairs) = best.unwrap_or((BigRational::zero(), vec![]));
    Ok(TJoin { pairs, cost })
}

/// A tree with its parity correction and the shortcut tour.
#[derive(Clone, Debug)]
pub struct TourCandidate {
    pub tree: BitSet,
    pub tree_cost: BigRational,
    pub join: TJoin,
    pub path: HamPath,
}

/// Walk the Eulerian trail of tree ⊎ join from s and shortcut repeated
/// vertices; the metric makes the result no more expensive than the
/// multigraph.
pub fn assemble_tour(inst: &Instance, tree: &BitSet, join: &TJoin) -> Result<TourCandidate> {
    let idx = inst.edge_index();
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());

    // multigraph adjacency: tree edges plus join pairs as separate instances
    let mut arcs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (neighbor, instance)
    let mut instance_count = 0usize;
    let mut add_edge = |arcs: &mut Vec<Vec<(usize, usize)>>, a: usize, b: usize| {
        arcs[a].push((b, instance_count));
        arcs[b].push((a, instance_count));
        instance_count += 1;
    };
    for e in tree.iter() {
        let (a, b) = idx.ends(e);
        add_edge(&mut arcs, a, b);
    }
    for &(a, b) in &join.pairs {
        add_edge(&mut arcs, a, b);
    }
    for list in arcs.iter_mut() {
        list.sort(); // deterministic lowest-neighbor-first traversal
    }

    // parity pre-check: odd degree exactly at s and t
    for (v, list) in arcs.iter().enumerate() {
        let odd = list.len() % 2 == 1;
        let endpoint = v == s || v == t;
        if odd != endpoint {
            return Err(Error::Parity(format!(
                "multigraph degree parity wrong at {v} (degree {})",
                list.len()
            )));
        }
    }
    // connectivity pre-check
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for &(w, _) in &arcs[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if seen.iter().any(|&ok| !ok) {
        return Err(Error::Parity("multigraph is disconnected".into()));
    }

    // Hierholzer with explicit stack; edges consumed lowest-first
    let mut used = vec![false; instance_count];
    let mut next_arc = vec![0usize; n];
    let mut stack = vec![s];
    let mut walk = Vec::with_capacity(instance_count + 1);
    while let Some(&v) = stack.last() {
        let mut advanced = false;
        while next_arc[v] < arcs[v].len() {
            let (w, inst_id) = arcs[v][next_arc[v]];
            next_arc[v] += 1;
            if !used[inst_id] {
                used[inst_id] = true;
                stack.push(w);
                advanced = true;
                break;
            }
        }
        if !advanced {
            walk.push(v);
            stack.pop();
        }
    }
    walk.reverse();
    if walk.first() != Some(&s) || walk.last() != Some(&t) || walk.len() != instance_count + 1 {
        return Err(Error::Parity(
            "Eulerian walk construction failed; parity or connectivity broken".into(),
        ));
    }

    // shortcut: keep first visits, with t pinned to the end
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for &v in &walk {
        if v != t && !visited[v] {
            visited[v] = true;
            order.push(v);
        }
    }
    order.push(t);
    let path = inst.ham_path(order)?;

    let tree_cost = inst.set_cost(tree);
    let multigraph_cost = tree_cost.clone() + &join.cost;
    if path.cost > multigraph_cost {
        return Err(Error::Parity(format!(
            "shortcut path costs {} > multigraph {}; triangle inequality violated?",
            path.cost, multigraph_cost
        )));
    }
    Ok(TourCandidate {
        tree: tree.clone(),
        tree_cost,
        join: join.clone(),
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, MetricKind};
    use crate::ratio::rat_int;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn tree_of(inst: &Instance, pairs: &[(usize, usize)]) -> BitSet {
        let idx = inst.edge_index();
        let mut t = idx.empty_edges();
        for (u, v) in pairs {
            t.insert(idx.id(*u, *v));
        }
        t
    }

    #[test]
    fn path_has_no_wrong_parity() {
        let inst = Instance::line(5);
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(wrong_parity_set(&inst, &tree).is_empty());
    }

    #[test]
    fn star_center_and_leaf() {
        // star at u=1 with leaves s=0, t=3, w=2: wrong parity at {1, 2}
        let inst = Instance::line(4);
        let tree = tree_of(&inst, &[(1, 0), (1, 2), (1, 3)]);
        let t_set = wrong_parity_set(&inst, &tree);
        assert_eq!(t_set.to_vec(), vec![1, 2]);
    }

    #[test]
    fn parity_sets_are_even() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let inst = Instance::random(15, 9, MetricKind::Euclidean).unwrap();
        let idx = inst.edge_index();
        for _ in 0..20 {
            // random spanning tree by random attachment
            let mut perm: Vec<usize> = (0..9).collect();
            perm.shuffle(&mut rng);
            let mut tree = idx.empty_edges();
            for i in 1..9 {
                let j = rand::Rng::gen_range(&mut rng, 0..i);
                tree.insert(idx.id(perm[i], perm[j]));
            }
            assert_eq!(wrong_parity_set(&inst, &tree).count() % 2, 0);
        }
    }

    #[test]
    fn empty_t_join() {
        let inst = Instance::line(4);
        let join = min_tjoin(&inst, &BitSet::new(4), MATCHING_CAP).unwrap();
        assert!(join.pairs.is_empty());
        assert_eq!(join.cost, rat_int(0));
    }

    #[test]
    fn pair_t_join() {
        let inst = Instance::line(4);
        let t_set = BitSet::from_iter(4, [1, 3]);
        let join = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap();
        assert_eq!(join.pairs, vec![(1, 3)]);
        assert_eq!(join.cost, rat_int(2));
    }

    #[test]
    fn odd_t_rejected() {
        let inst = Instance::line(4);
        let t_set = BitSet::from_iter(4, [0, 1, 2]);
        assert!(min_tjoin(&inst, &t_set, MATCHING_CAP).is_err());
    }

    #[test]
    fn cap_enforced() {
        let inst = Instance::line(6);
        let t_set = BitSet::from_iter(6, 0..6);
        assert!(min_tjoin(&inst, &t_set, 4).is_err());
    }

    #[test]
    fn dp_matches_exhaustive_enumeration() {
        for seed in [1u64, 5, 9, 12, 30] {
            let inst = Instance::random(seed, 8, MetricKind::RandomClosure).unwrap();
            let t_set = BitSet::from_iter(8, [0, 2, 3, 5, 6, 7]);
            let dp = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap();
            let brute = min_tjoin_brute(&inst, &t_set).unwrap();
            assert_eq!(dp.cost, brute.cost, "seed {seed}");
        }
    }

    #[test]
    fn matching_invariant_under_relabeling() {
        let inst = Instance::random(31, 8, MetricKind::Euclidean).unwrap();
        let t_set = BitSet::from_iter(8, [1, 2, 4, 6]);
        let cost = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap().cost;
        let perm = vec![7, 5, 3, 1, 6, 4, 2, 0];
        let relabeled = inst.relabel(&perm).unwrap();
        let t_set2 = BitSet::from_iter(8, t_set.iter().map(|v| perm[v]));
        let cost2 = min_tjoin(&relabeled, &t_set2, MATCHING_CAP).unwrap().cost;
        assert_eq!(cost, cost2);
    }

    #[test]
    fn tour_from_path_is_identity() {
        let inst = Instance::line(5);
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let join = TJoin {
            pairs: vec![],
            cost: rat_int(0),
        };
        let cand = assemble_tour(&inst, &tree, &join).unwrap();
        assert_eq!(cand.path.order, vec![0, 1, 2, 3, 4]);
        assert_eq!(cand.path.cost, rat_int(4));
    }

    #[test]
    fn star_tour_shortcuts() {
        // line-4 star at 1, join fixes {1,2}; tour cost ≤ c(S) + c(J)
        let inst = Instance::line(4);
        let tree = tree_of(&inst, &[(0, 1), (1, 2), (1, 3)]);
        let t_set = wrong_parity_set(&inst, &tree);
        let join = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap();
        let cand = assemble_tour(&inst, &tree, &join).unwrap();
        let bound = inst.set_cost(&tree) + &join.cost;
        assert!(cand.path.cost <= bound);
        assert_eq!(cand.path.order[0], 0);
        assert_eq!(cand.path.order[3], 3);
    }

    #[test]
    fn disconnected_multigraph_rejected() {
        let inst = Instance::line(4);
        // forest: missing the 2-3 link entirely
        let forest = tree_of(&inst, &[(0, 1), (1, 2)]);
        let join = TJoin {
            pairs: vec![],
            cost: rat_int(0),
        };
        assert!(assemble_tour(&inst, &forest, &join).is_err());
    }

    #[test]
    fn random_tours_respect_multigraph_bound() {
        for seed in [4u64, 17] {
            let inst = Instance::random(seed, 9, MetricKind::Euclidean).unwrap();
            let idx = inst.edge_index();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10 {
                let mut tree = idx.empty_edges();
                for i in 1..9 {
                    let j = rand::Rng::gen_range(&mut rng, 0..i);
                    tree.insert(idx.id(i, j));
                }
                let t_set = wrong_parity_set(&inst, &tree);
                let join = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap();
                let cand = assemble_tour(&inst, &tree, &join).unwrap();
                assert!(cand.path.cost <= inst.set_cost(&tree) + &join.cost);
            }
        }
    }
}
