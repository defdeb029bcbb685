//! Dense edge indexing for the complete graph plus the small graph
//! routines the reassembly machinery leans on: connectivity inside an
//! induced subgraph, tree paths, reachability after deleting a cut.
//!
//! Edges are unordered pairs `{u, v}` with `u < v`, mapped to a dense id.

use crate::bits::BitSet;

/// Edge numbering of the complete graph on `n` vertices.
#[derive(Clone, Debug)]
pub struct EdgeIndex {
    n: usize,
    ends: Vec<(usize, usize)>,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Self {
        let mut ends = Vec::with_capacity(n * (n - 1) / 2);
        for v in 0..n {
            for u in 0..v {
                ends.push((u, v));
            }
        }
        EdgeIndex { n, ends }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges, n(n-1)/2.
    pub fn m(&self) -> usize {
        self.ends.len()
    }

    #[inline]
    pub fn id(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < self.n && v < self.n);
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        v * (v - 1) / 2 + u
    }

    #[inline]
    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    pub fn empty_edges(&self) -> BitSet {
        BitSet::new(self.m())
    }

    pub fn empty_vertices(&self) -> BitSet {
        BitSet::new(self.n)
    }

    pub fn full_vertices(&self) -> BitSet {
        BitSet::from_iter(self.n, 0..self.n)
    }

    /// δ(U): edges with exactly one endpoint in `u_set`.
    pub fn cut_edges(&self, u_set: &BitSet) -> BitSet {
        let mut out = self.empty_edges();
        for e in 0..self.m() {
            let (a, b) = self.ends[e];
            if u_set.contains(a) != u_set.contains(b) {
                out.insert(e);
            }
        }
        out
    }

    /// E[U]: edges with both endpoints in `u_set`.
    pub fn inner_edges(&self, u_set: &BitSet) -> BitSet {
        let mut out = self.empty_edges();
        for e in 0..self.m() {
            let (a, b) = self.ends[e];
            if u_set.contains(a) && u_set.contains(b) {
                out.insert(e);
            }
        }
        out
    }

    /// δ(v) as an edge set.
    pub fn star(&self, v: usize) -> BitSet {
        let mut out = self.empty_edges();
        for w in 0..self.n {
            if w != v {
                out.insert(self.id(v, w));
            }
        }
        out
    }

    pub fn degree_in(&self, edges: &BitSet, v: usize) -> usize {
        let mut d = 0;
        for w in 0..self.n {
            if w != v && edges.contains(self.id(v, w)) {
                d += 1;
            }
        }
        d
    }

    /// Adjacency lists of an edge subset.
    pub fn adjacency(&self, edges: &BitSet) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in edges.iter() {
            let (a, b) = self.ends[e];
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Is `edges` the edge set of a spanning tree of the complete graph?
    pub fn is_spanning_tree(&self, edges: &BitSet) -> bool {
        if edges.count() != self.n - 1 {
            return false;
        }
        let mut uf = UnionFind::new(self.n);
        for e in edges.iter() {
            let (a, b) = self.ends[e];
            if !uf.union(a, b) {
                return false;
            }
        }
        true
    }

    /// Connected components of `(V, edges)[within]`, as vertex sets.
    /// Only edges with both ends inside `within` count; isolated vertices
    /// of `within` form singleton components.
    pub fn components_within(&self, edges: &BitSet, within: &BitSet) -> Vec<BitSet> {
        let mut uf = UnionFind::new(self.n);
        for e in edges.iter() {
            let (a, b) = self.ends[e];
            if within.contains(a) && within.contains(b) {
                uf.union(a, b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, BitSet> = Default::default();
        for v in within.iter() {
            groups
                .entry(uf.find(v))
                .or_insert_with(|| self.empty_vertices())
                .insert(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected_within(&self, edges: &BitSet, within: &BitSet) -> bool {
        self.components_within(edges, within).len() <= 1
    }

    /// Vertices reachable from `start` using only `edges`.
    pub fn reachable(&self, edges: &BitSet, start: usize) -> BitSet {
        let adj = self.adjacency(edges);
        let mut seen = self.empty_vertices();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Edge ids of the unique `a`-`b` path in the tree `edges`.
    /// Panics if `edges` is not connected between the endpoints.
    pub fn tree_path(&self, edges: &BitSet, a: usize, b: usize) -> Vec<usize> {
        let adj = self.adjacency(edges);
        let mut parent = vec![usize::MAX; self.n];
        parent[a] = a;
        let mut queue = std::collections::VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &w in &adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        assert!(parent[b] != usize::MAX, "tree_path: endpoints not connected");
        let mut path = Vec::new();
        let mut v = b;
        while v != a {
            path.push(self.id(v, parent[v]));
            v = parent[v];
        }
        path.reverse();
        path
    }

    /// Vertex sequence of the unique `a`-`b` path in the tree `edges`.
    pub fn tree_path_vertices(&self, edges: &BitSet, a: usize, b: usize) -> Vec<usize> {
        let adj = self.adjacency(edges);
        let mut parent = vec![usize::MAX; self.n];
        parent[a] = a;
        let mut queue = std::collections::VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        assert!(parent[b] != usize::MAX);
        let mut verts = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v];
            verts.push(v);
        }
        verts.reverse();
        verts
    }

    /// Minimal subtree of the tree `edges` spanning the terminal set `m_set`:
    /// the union of all pairwise tree paths. Computed by repeatedly pruning
    /// non-terminal leaves.
    pub fn steiner_subtree(&self, edges: &BitSet, m_set: &BitSet) -> BitSet {
        let mut sub = edges.clone();
        let mut degree = vec![0usize; self.n];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for e in sub.iter() {
            let (a, b) = self.ends[e];
            degree[a] += 1;
            degree[b] += 1;
            incident[a].push(e);
            incident[b].push(e);
        }
        let mut queue: Vec<usize> = (0..self.n)
            .filter(|&v| degree[v] == 1 && !m_set.contains(v))
            .collect();
        while let Some(v) = queue.pop() {
            let Some(&e) = incident[v].iter().find(|&&e| sub.contains(e)) else {
                continue;
            };
            sub.remove(e);
            let (a, b) = self.ends[e];
            let w = if a == v { b } else { a };
            degree[v] -= 1;
            degree[w] -= 1;
            if degree[w] == 1 && !m_set.contains(w) {
                queue.push(w);
            }
        }
        // Isolated terminals may remain when the tree is not connected on
        // the terminals' side; callers only rely on edges, which is fine.
        sub
    }
}

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_tree(idx: &EdgeIndex) -> BitSet {
        // 0-1-2-3
        let mut t = idx.empty_edges();
        for v in 0..idx.n() - 1 {
            t.insert(idx.id(v, v + 1));
        }
        t
    }

    #[test]
    fn edge_ids_roundtrip() {
        let idx = EdgeIndex::new(7);
        for e in 0..idx.m() {
            let (u, v) = idx.ends(e);
            assert_eq!(idx.id(u, v), e);
            assert_eq!(idx.id(v, u), e);
        }
    }

    #[test]
    fn spanning_tree_check() {
        let idx = EdgeIndex::new(4);
        let t = path_tree(&idx);
        assert!(idx.is_spanning_tree(&t));
        let mut cycle = t.clone();
        cycle.remove(idx.id(2, 3));
        cycle.insert(idx.id(0, 2));
        assert!(!idx.is_spanning_tree(&cycle)); // cycle 0-1-2 + isolated 3
    }

    #[test]
    fn components_and_paths() {
        let idx = EdgeIndex::new(5);
        let mut t = idx.empty_edges();
        // star at 2
        for v in [0, 1, 3, 4] {
            t.insert(idx.id(2, v));
        }
        let within = BitSet::from_iter(5, [0, 1, 3]);
        let comps = idx.components_within(&t, &within);
        assert_eq!(comps.len(), 3); // 2 is excluded, so leaves are singletons
        assert!(idx.is_connected_within(&t, &BitSet::from_iter(5, [0, 2, 4])));

        let p = idx.tree_path(&t, 0, 4);
        assert_eq!(p, vec![idx.id(0, 2), idx.id(2, 4)]);
        assert_eq!(idx.tree_path_vertices(&t, 0, 4), vec![0, 2, 4]);
    }

    #[test]
    fn steiner_prunes_leaves() {
        let idx = EdgeIndex::new(6);
        let mut t = idx.empty_edges();
        // path 0-1-2-3 with hairs 4 on 1, 5 on 2
        for (a, b) in [(0, 1), (1, 2), (2, 3), (1, 4), (2, 5)] {
            t.insert(idx.id(a, b));
        }
        let m_set = BitSet::from_iter(6, [0, 3]);
        let sub = idx.steiner_subtree(&t, &m_set);
        assert_eq!(sub.to_vec(), {
            let mut v = vec![idx.id(0, 1), idx.id(1, 2), idx.id(2, 3)];
            v.sort();
            v
        });
    }

    #[test]
    fn cut_and_inner_edges() {
        let idx = EdgeIndex::new(4);
        let u = BitSet::from_iter(4, [0, 1]);
        let cut = idx.cut_edges(&u);
        assert_eq!(cut.count(), 4);
        assert!(cut.contains(idx.id(0, 2)));
        assert!(!cut.contains(idx.id(0, 1)));
        let inner = idx.inner_edges(&u);
        assert_eq!(inner.to_vec(), vec![idx.id(0, 1)]);
    }
}
