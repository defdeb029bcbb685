//! Max-flow / min-cut on the support of a fractional edge vector.
//!
//! Edmonds–Karp on a dense residual matrix; undirected capacities become a
//! pair of arcs. Terminal *sets* are supported so callers can contract
//! {s,t} into one side or pin a vertex to a side. Exact with rational
//! capacities, tolerance-guarded with floats.

use crate::bits::BitSet;
use crate::graph::EdgeIndex;
use crate::ratio::Scalar;

use std::collections::VecDeque;

pub struct MaxFlowResult<S> {
    pub value: S,
    /// Vertices residual-reachable from the source set; the inclusion-wise
    /// minimal minimum cut has this as its source side.
    pub source_side: BitSet,
}

/// Max flow between the contracted vertex sets `sources` and `sinks` in the
/// undirected graph whose edge `e` has capacity `cap[e]`.
pub fn max_flow_min_cut<S: Scalar>(
    idx: &EdgeIndex,
    cap: &[S],
    sources: &BitSet,
    sinks: &BitSet,
) -> MaxFlowResult<S> {
    let n = idx.n();
    assert!(!sources.intersects(sinks), "terminal sets must be disjoint");
    let mut residual = vec![S::zero(); n * n];
    for e in 0..idx.m() {
        if cap[e] > S::zero() {
            let (u, v) = idx.ends(e);
            residual[u * n + v] = cap[e].clone();
            residual[v * n + u] = cap[e].clone();
        }
    }

    let mut value = S::zero();
    loop {
        // BFS for a shortest augmenting path from any source to any sink.
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for v in sources.iter() {
            parent[v] = v;
            queue.push_back(v);
        }
        let mut hit = usize::MAX;
        'bfs: while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if parent[w] == usize::MAX && residual[v * n + w] > S::tol() {
                    parent[w] = v;
                    if sinks.contains(w) {
                        hit = w;
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        if hit == usize::MAX {
            break;
        }
        // Bottleneck along the path.
        let mut bottleneck: Option<S> = None;
        let mut v = hit;
        while parent[v] != v {
            let p = parent[v];
            let r = residual[p * n + v].clone();
            bottleneck = Some(match bottleneck {
                None => r,
                Some(b) if r < b => r,
                Some(b) => b,
            });
            v = p;
        }
        let aug = bottleneck.expect("augmenting path has at least one arc");
        let mut v = hit;
        while parent[v] != v {
            let p = parent[v];
            residual[p * n + v] = residual[p * n + v].clone() - aug.clone();
            residual[v * n + p] = residual[v * n + p].clone() + aug.clone();
            v = p;
        }
        value = value + aug;
    }

    // Source side of the min cut: residual-reachable vertices.
    let mut side = BitSet::new(n);
    let mut queue: VecDeque<usize> = sources.iter().collect();
    for v in sources.iter() {
        side.insert(v);
    }
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if !side.contains(w) && residual[v * n + w] > S::tol() {
                side.insert(w);
                queue.push_back(w);
            }
        }
    }
    MaxFlowResult {
        value,
        source_side: side,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;
    use num_rational::BigRational;
    use num_traits::Zero;

    #[test]
    fn path_bottleneck() {
        // 0 -1- 1 -1/2- 2 -1- 3, flow limited by the middle edge
        let idx = EdgeIndex::new(4);
        let mut cap = vec![BigRational::zero(); idx.m()];
        cap[idx.id(0, 1)] = rat(1, 1);
        cap[idx.id(1, 2)] = rat(1, 2);
        cap[idx.id(2, 3)] = rat(1, 1);
        let s = BitSet::from_iter(4, [0]);
        let t = BitSet::from_iter(4, [3]);
        let res = max_flow_min_cut(&idx, &cap, &s, &t);
        assert_eq!(res.value, rat(1, 2));
        assert_eq!(res.source_side.to_vec(), vec![0, 1]);
    }

    #[test]
    fn contracted_terminals() {
        // square s(0) - a(1) - t(2) - b(3) - s; pin a to one side, {s,t} other
        let idx = EdgeIndex::new(4);
        let mut cap = vec![BigRational::zero(); idx.m()];
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            cap[idx.id(u, v)] = rat(1, 1);
        }
        let sources = BitSet::from_iter(4, [1]);
        let sinks = BitSet::from_iter(4, [0, 2]);
        let res = max_flow_min_cut(&idx, &cap, &sources, &sinks);
        assert_eq!(res.value, rat(2, 1));
        assert_eq!(res.source_side.to_vec(), vec![1]);
    }

    #[test]
    fn zero_support() {
        let idx = EdgeIndex::new(3);
        let cap = vec![BigRational::zero(); idx.m()];
        let s = BitSet::from_iter(3, [0]);
        let t = BitSet::from_iter(3, [2]);
        let res = max_flow_min_cut(&idx, &cap, &s, &t);
        assert_eq!(res.value, BigRational::zero());
        assert_eq!(res.source_side.to_vec(), vec![0]);
    }

    #[test]
    fn float_matches_exact() {
        let idx = EdgeIndex::new(5);
        let mut cap_f = vec![0.0f64; idx.m()];
        let mut cap_q = vec![BigRational::zero(); idx.m()];
        let edges = [(0, 1, 0.5), (1, 4, 0.5), (0, 2, 0.75), (2, 4, 0.25), (1, 2, 0.25), (0, 3, 1.0), (3, 4, 0.5)];
        for &(u, v, c) in &edges {
            cap_f[idx.id(u, v)] = c;
            cap_q[idx.id(u, v)] = crate::ratio::rat_from_f64(c);
        }
        let s = BitSet::from_iter(5, [0]);
        let t = BitSet::from_iter(5, [4]);
        let rf = max_flow_min_cut(&idx, &cap_f, &s, &t);
        let rq = max_flow_min_cut(&idx, &cap_q, &s, &t);
        assert!((rf.value - crate::ratio::rat_to_f64(&rq.value)).abs() < 1e-12);
    }
}
