//! Instance model: a complete metric on `n` cities with endpoints `s`,`t`.
//!
//! Costs are stored as exact rationals no matter where they came from.
//! Integer inputs (TSPLIB, graph metrics) stay integral; float inputs are
//! lifted bit-exactly, so the downstream counting and certificate
//! arithmetic never sees rounding. The `integral` flag records which case
//! we are in, which picks the default LP arithmetic.

use crate::error::{Error, Result};
use crate::graph::EdgeIndex;
use crate::ratio::{rat_from_str, rat_int, rat_to_f64, rat_to_string};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap for the exhaustive optimum oracle.
pub const BRUTE_FORCE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceFormat {
    Tsplib,
    NativeJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Euclidean,
    GraphMetric,
    RandomClosure,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "graph-metric" => Ok(MetricKind::GraphMetric),
            "random-closure" => Ok(MetricKind::RandomClosure),
            other => Err(Error::Config(format!("unknown metric kind {other:?}"))),
        }
    }
}

#[derive(Clone)]
pub struct Instance {
    name: String,
    n: usize,
    s: usize,
    t: usize,
    /// Cost per dense edge id (u < v).
    costs: Vec<BigRational>,
    /// All costs are integers.
    integral: bool,
    /// Pre-closure weights, kept when the closure changed anything.
    raw_costs: Option<Vec<BigRational>>,
    idx: EdgeIndex,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Instance({}, n={}, s={}, t={}, integral={})",
            self.name, self.n, self.s, self.t, self.integral
        )
    }
}

/// A Hamiltonian s-t path with its exact cost.
#[derive(Clone, Debug, PartialEq)]
pub struct HamPath {
    pub order: Vec<usize>,
    pub cost: BigRational,
}

impl Instance {
    /// Build from per-edge costs. Applies the metric closure when the raw
    /// weights violate the triangle inequality (keeping the originals as
    /// metadata) and validates every instance invariant.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        s: usize,
        t: usize,
        costs: Vec<BigRational>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Instance(format!("n = {n} < 2")));
        }
        if s >= n || t >= n {
            return Err(Error::Instance("endpoint index out of range".into()));
        }
        if s == t {
            return Err(Error::Instance("s = t is not allowed".into()));
        }
        let idx = EdgeIndex::new(n);
        if costs.len() != idx.m() {
            return Err(Error::Instance(format!(
                "expected {} edge costs, got {}",
                idx.m(),
                costs.len()
            )));
        }
        if let Some(e) = costs.iter().position(|c| c.is_negative()) {
            let (u, v) = idx.ends(e);
            return Err(Error::Instance(format!("negative cost on edge ({u},{v})")));
        }
        let closed = metric_closure(n, &costs);
        let raw_costs = if closed == costs { None } else { Some(costs) };
        let integral = closed.iter().all(|c| c.is_integer());
        Ok(Instance {
            name: name.into(),
            n,
            s,
            t,
            costs: closed,
            integral,
            raw_costs,
            idx,
        })
    }

    /// Build from a full n×n matrix, validating symmetry and the diagonal.
    pub fn from_matrix(
        name: impl Into<String>,
        matrix: &[Vec<BigRational>],
        s: usize,
        t: usize,
    ) -> Result<Self> {
        let n = matrix.len();
        if n < 2 {
            return Err(Error::Instance(format!("n = {n} < 2")));
        }
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Instance("matrix is not square".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if !row[i].is_zero() {
                return Err(Error::Instance(format!("nonzero diagonal at {i}")));
            }
            for (j, v) in row.iter().enumerate() {
                if matrix[j][i] != *v {
                    return Err(Error::Instance(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        let idx = EdgeIndex::new(n);
        let costs = (0..idx.m())
            .map(|e| {
                let (u, v) = idx.ends(e);
                matrix[u][v].clone()
            })
            .collect();
        Instance::new(name, n, s, t, costs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edge_index(&self) -> &EdgeIndex {
        &self.idx
    }

    pub fn integral(&self) -> bool {
        self.integral
    }

    /// Non-None iff the metric closure changed the raw weights.
    pub fn raw_costs(&self) -> Option<&[BigRational]> {
        self.raw_costs.as_deref()
    }

    pub fn cost(&self, u: usize, v: usize) -> &BigRational {
        &self.costs[self.idx.id(u, v)]
    }

    pub fn edge_cost(&self, e: usize) -> &BigRational {
        &self.costs[e]
    }

    pub fn costs(&self) -> &[BigRational] {
        &self.costs
    }

    pub fn costs_f64(&self) -> Vec<f64> {
        self.costs.iter().map(rat_to_f64).collect()
    }

    /// c(F) for an edge set.
    pub fn set_cost(&self, edges: &crate::bits::BitSet) -> BigRational {
        edges.iter().map(|e| self.costs[e].clone()).sum()
    }

    /// c(x) for an edge vector.
    pub fn vector_cost(&self, x: &[BigRational]) -> BigRational {
        x.iter()
            .zip(self.costs.iter())
            .filter(|(xe, _)| !xe.is_zero())
            .map(|(xe, ce)| xe * ce)
            .sum()
    }

    pub fn path_cost(&self, order: &[usize]) -> BigRational {
        order
            .windows(2)
            .map(|w| self.cost(w[0], w[1]).clone())
            .sum()
    }

    /// Validate and cost a vertex order as a Hamiltonian s-t path.
    pub fn ham_path(&self, order: Vec<usize>) -> Result<HamPath> {
        if order.len() != self.n
            || order.first() != Some(&self.s)
            || order.last() != Some(&self.t)
        {
            return Err(Error::Instance("not an s-t ordering".into()));
        }
        let mut seen = vec![false; self.n];
        for &v in &order {
            if v >= self.n || seen[v] {
                return Err(Error::Instance("order is not a permutation".into()));
            }
            seen[v] = true;
        }
        let cost = self.path_cost(&order);
        Ok(HamPath { order, cost })
    }

    pub fn parse(text: &str, format: InstanceFormat, st: Option<(usize, usize)>) -> Result<Self> {
        match format {
            InstanceFormat::Tsplib => parse_tsplib(text, st),
            InstanceFormat::NativeJson => parse_native_json(text, st),
        }
    }

    /// Deterministic random instance; identical (seed, n, kind) gives an
    /// identical instance.
    pub fn random(seed: u64, n: usize, kind: MetricKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::Instance(format!("n = {n} < 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = EdgeIndex::new(n);
        let name = format!(
            "random-{}-n{}-seed{}",
            match kind {
                MetricKind::Euclidean => "euclidean",
                MetricKind::GraphMetric => "graph-metric",
                MetricKind::RandomClosure => "random-closure",
            },
            n,
            seed
        );
        let costs: Vec<BigRational> = match kind {
            MetricKind::Euclidean => {
                let coords: Vec<(i64, i64)> = (0..n)
                    .map(|_| (rng.gen_range(0..=1000), rng.gen_range(0..=1000)))
                    .collect();
                (0..idx.m())
                    .map(|e| {
                        let (u, v) = idx.ends(e);
                        let dx = (coords[u].0 - coords[v].0) as f64;
                        let dy = (coords[u].1 - coords[v].1) as f64;
                        // TSPLIB-style nearest-integer Euclidean distance
                        rat_int((dx * dx + dy * dy).sqrt().round() as i64)
                    })
                    .collect()
            }
            MetricKind::GraphMetric => {
                // random connected unweighted graph: random attachment tree
                // plus extra edges, then BFS shortest paths
                let mut adj = vec![vec![]; n];
                for v in 1..n {
                    let u = rng.gen_range(0..v);
                    adj[u].push(v);
                    adj[v].push(u);
                }
                for e in 0..idx.m() {
                    let (u, v) = idx.ends(e);
                    if !adj[u].contains(&v) && rng.gen_bool(0.3) {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
                let mut dist = vec![vec![0usize; n]; n];
                for src in 0..n {
                    let mut d = vec![usize::MAX; n];
                    d[src] = 0;
                    let mut queue = std::collections::VecDeque::from([src]);
                    while let Some(v) = queue.pop_front() {
                        for &w in &adj[v] {
                            if d[w] == usize::MAX {
                                d[w] = d[v] + 1;
                                queue.push_back(w);
                            }
                        }
                    }
                    dist[src] = d;
                }
                (0..idx.m())
                    .map(|e| {
                        let (u, v) = idx.ends(e);
                        rat_int(dist[u][v] as i64)
                    })
                    .collect()
            }
            MetricKind::RandomClosure => {
                // dyadic weights k/8 in (0, 8]; the closure below fixes any
                // triangle violations
                (0..idx.m())
                    .map(|_| BigRational::new(rng.gen_range(1..=64).into(), 8.into()))
                    .collect()
            }
        };
        Instance::new(name, n, 0, n - 1, costs)
    }

    /// Conjugate the instance by a relabeling permutation: city i becomes
    /// perm[i]. Useful for invariance testing.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.n);
        let idx = EdgeIndex::new(self.n);
        let mut costs = vec![BigRational::zero(); idx.m()];
        for e in 0..idx.m() {
            let (u, v) = idx.ends(e);
            costs[idx.id(perm[u], perm[v])] = self.costs[e].clone();
        }
        Instance::new(
            format!("{}-relabeled", self.name),
            self.n,
            perm[self.s],
            perm[self.t],
            costs,
        )
    }

    /// Exact minimum-cost Hamiltonian s-t path by bitmask dynamic
    /// programming over subsets, O(2^n·n^2).
    pub fn brute_force_opt(&self, cap: usize) -> Result<HamPath> {
        if self.n > cap {
            return Err(Error::BruteForceCap { n: self.n, cap });
        }
        let others: Vec<usize> = (0..self.n).filter(|&v| v != self.s).collect();
        let t_pos = others.iter().position(|&v| v == self.t).unwrap();
        let k = others.len();
        let full = (1usize << k) - 1;
        let mut dp: Vec<Vec<Option<BigRational>>> = vec![vec![None; k]; 1 << k];
        let mut parent: Vec<Vec<usize>> = vec![vec![usize::MAX; k]; 1 << k];
        for i in 0..k {
            dp[1 << i][i] = Some(self.cost(self.s, others[i]).clone());
        }
        for mask in 1..=full {
            for last in 0..k {
                if mask & (1 << last) == 0 {
                    continue;
                }
                let Some(base) = dp[mask][last].clone() else {
                    continue;
                };
                // paths must end at t, so never extend beyond it
                if last == t_pos {
                    continue;
                }
                for next in 0..k {
                    if mask & (1 << next) != 0 {
                        continue;
                    }
                    let cand = base.clone() + self.cost(others[last], others[next]);
                    let slot = &mut dp[mask | (1 << next)][next];
                    if slot.as_ref().is_none_or(|cur| cand < *cur) {
                        *slot = Some(cand);
                        parent[mask | (1 << next)][next] = last;
                    }
                }
            }
        }
        let cost = dp[full][t_pos]
            .clone()
            .ok_or_else(|| Error::Instance("no path found".into()))?;
        let mut order = vec![self.t];
        let mut mask = full;
        let mut at = t_pos;
        while parent[mask][at] != usize::MAX {
            let prev = parent[mask][at];
            mask &= !(1 << at);
            at = prev;
            order.push(others[at]);
        }
        order.push(self.s);
        order.reverse();
        debug_assert_eq!(order.len(), self.n);
        Ok(HamPath { order, cost })
    }
}

/// All-pairs shortest paths (Floyd–Warshall) in exact arithmetic.
/// Idempotent, pointwise ≤ the input; fixes every triangle violation.
pub fn metric_closure(n: usize, costs: &[BigRational]) -> Vec<BigRational> {
    let idx = EdgeIndex::new(n);
    let mut d = costs.to_vec();
    for k in 0..n {
        for u in 0..n {
            if u == k {
                continue;
            }
            for v in (u + 1)..n {
                if v == k {
                    continue;
                }
                let via = d[idx.id(u, k)].clone() + &d[idx.id(k, v)];
                let e = idx.id(u, v);
                if via < d[e] {
                    d[e] = via;
                }
            }
        }
    }
    d
}

pub fn is_metric(n: usize, costs: &[BigRational]) -> bool {
    metric_closure(n, costs) == costs
}

// ---------------------------------------------------------------------------
// parsing

fn parse_tsplib(text: &str, st: Option<(usize, usize)>) -> Result<Instance> {
    let mut name = String::from("tsplib");
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut weight_format: Option<String> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut weights: Vec<BigRational> = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        Header,
        Coords,
        Weights,
    }
    let mut section = Section::Header;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line == "EOF" {
            continue;
        }
        match section {
            Section::Header => {
                if let Some((key, val)) = line.split_once(':') {
                    let key = key.trim().to_ascii_uppercase();
                    let val = val.trim();
                    match key.as_str() {
                        "NAME" => name = val.to_string(),
                        "DIMENSION" => {
                            dimension = Some(val.parse().map_err(|_| {
                                Error::Parse(format!("bad DIMENSION {val:?}"))
                            })?)
                        }
                        "EDGE_WEIGHT_TYPE" => weight_type = Some(val.to_ascii_uppercase()),
                        "EDGE_WEIGHT_FORMAT" => weight_format = Some(val.to_ascii_uppercase()),
                        _ => {}
                    }
                } else if line.eq_ignore_ascii_case("NODE_COORD_SECTION") {
                    section = Section::Coords;
                } else if line.eq_ignore_ascii_case("EDGE_WEIGHT_SECTION") {
                    section = Section::Weights;
                } else if line.eq_ignore_ascii_case("DISPLAY_DATA_SECTION") {
                    break;
                }
            }
            Section::Coords => {
                if line.eq_ignore_ascii_case("EDGE_WEIGHT_SECTION") {
                    section = Section::Weights;
                    continue;
                }
                let mut parts = line.split_whitespace();
                let _id = parts.next();
                let x: f64 = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad coord line {line:?}")))?;
                let y: f64 = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad coord line {line:?}")))?;
                coords.push((x, y));
            }
            Section::Weights => {
                if line.eq_ignore_ascii_case("NODE_COORD_SECTION") {
                    section = Section::Coords;
                    continue;
                }
                for tok in line.split_whitespace() {
                    weights.push(
                        rat_from_str(tok)
                            .ok_or_else(|| Error::Parse(format!("bad weight {tok:?}")))?,
                    );
                }
            }
        }
    }

    let n = dimension.ok_or_else(|| Error::Parse("missing DIMENSION".into()))?;
    if n < 2 {
        return Err(Error::Instance(format!("n = {n} < 2")));
    }
    let (s, t) = st.unwrap_or((0, n - 1));

    let wt = weight_type.unwrap_or_else(|| "EXPLICIT".into());
    let matrix: Vec<Vec<BigRational>> = match wt.as_str() {
        "EUC_2D" => {
            if coords.len() != n {
                return Err(Error::Parse(format!(
                    "expected {n} coordinates, got {}",
                    coords.len()
                )));
            }
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let dx = coords[i].0 - coords[j].0;
                            let dy = coords[i].1 - coords[j].1;
                            rat_int((dx * dx + dy * dy).sqrt().round() as i64)
                        })
                        .collect()
                })
                .collect()
        }
        "EXPLICIT" => {
            let fmt = weight_format.unwrap_or_else(|| "FULL_MATRIX".into());
            match fmt.as_str() {
                "FULL_MATRIX" => {
                    if weights.len() != n * n {
                        return Err(Error::Parse(format!(
                            "FULL_MATRIX needs {} entries, got {} (non-square matrix)",
                            n * n,
                            weights.len()
                        )));
                    }
                    (0..n)
                        .map(|i| (0..n).map(|j| weights[i * n + j].clone()).collect())
                        .collect()
                }
                "UPPER_ROW" => {
                    if weights.len() != n * (n - 1) / 2 {
                        return Err(Error::Parse(format!(
                            "UPPER_ROW needs {} entries, got {}",
                            n * (n - 1) / 2,
                            weights.len()
                        )));
                    }
                    let mut mat = vec![vec![BigRational::zero(); n]; n];
                    let mut it = weights.into_iter();
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let w = it.next().unwrap();
                            mat[i][j] = w.clone();
                            mat[j][i] = w;
                        }
                    }
                    mat
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unsupported format: EDGE_WEIGHT_FORMAT {other}"
                    )))
                }
            }
        }
        other => {
            return Err(Error::Parse(format!(
                "unsupported format: EDGE_WEIGHT_TYPE {other}"
            )))
        }
    };

    Instance::from_matrix(name, &matrix, s, t)
}

/// Native JSON schema: {name, n, s, t, costs: row-major upper triangle}.
#[derive(Serialize, Deserialize)]
struct NativeInstance {
    name: String,
    n: usize,
    s: usize,
    t: usize,
    /// Row-major upper triangle: (0,1), (0,2), .., (0,n-1), (1,2), ..
    costs: Vec<serde_json::Value>,
}

fn cost_value_to_rat(v: &serde_json::Value) -> Option<BigRational> {
    match v {
        serde_json::Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Some(rat_int(i))
            } else {
                num.as_f64().and_then(|f| {
                    if f.is_finite() {
                        Some(crate::ratio::rat_from_f64(f))
                    } else {
                        None
                    }
                })
            }
        }
        serde_json::Value::String(s) => rat_from_str(s),
        _ => None,
    }
}

fn parse_native_json(text: &str, st: Option<(usize, usize)>) -> Result<Instance> {
    let raw: NativeInstance = serde_json::from_str(text)?;
    let n = raw.n;
    if n < 2 {
        return Err(Error::Instance(format!("n = {n} < 2")));
    }
    let m = n * (n - 1) / 2;
    if raw.costs.len() != m {
        return Err(Error::Parse(format!(
            "expected {m} upper-triangle costs, got {}",
            raw.costs.len()
        )));
    }
    let idx = EdgeIndex::new(n);
    // row-major upper triangle -> dense edge ids
    let mut costs = vec![BigRational::zero(); m];
    let mut k = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            costs[idx.id(u, v)] = cost_value_to_rat(&raw.costs[k])
                .ok_or_else(|| Error::Parse(format!("bad cost entry {:?}", raw.costs[k])))?;
            k += 1;
        }
    }
    let (s, t) = st.unwrap_or((raw.s, raw.t));
    Instance::new(raw.name, n, s, t, costs)
}

impl Instance {
    pub fn to_native_json(&self) -> String {
        let mut costs = Vec::with_capacity(self.idx.m());
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let c = self.cost(u, v);
                if c.is_integer() {
                    costs.push(serde_json::Value::String(c.numer().to_string()));
                } else {
                    costs.push(serde_json::Value::String(rat_to_string(c)));
                }
            }
        }
        serde_json::to_string_pretty(&NativeInstance {
            name: self.name.clone(),
            n: self.n,
            s: self.s,
            t: self.t,
            costs,
        })
        .expect("serialization cannot fail")
    }

    /// A line metric on n cities: c(i,j) = |i-j|, s = 0, t = n-1.
    pub fn line(n: usize) -> Instance {
        let idx = EdgeIndex::new(n);
        let costs = (0..idx.m())
            .map(|e| {
                let (u, v) = idx.ends(e);
                rat_int((v as i64 - u as i64).abs())
            })
            .collect();
        Instance::new(format!("line-{n}"), n, 0, n - 1, costs).expect("line metric is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn euc2d_345_triangle() {
        let text = "NAME: tri\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";
        let inst = Instance::parse(text, InstanceFormat::Tsplib, None).unwrap();
        assert_eq!(inst.cost(0, 1), &rat_int(5));
    }

    #[test]
    fn full_matrix_already_metric() {
        let text = "NAME: m\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 1\n2 1 0\nEOF\n";
        let inst = Instance::parse(text, InstanceFormat::Tsplib, None).unwrap();
        assert_eq!(inst.cost(0, 2), &rat_int(2));
        assert!(inst.raw_costs().is_none());
        assert!(inst.integral());
    }

    #[test]
    fn geo_unsupported() {
        let text = "DIMENSION: 3\nEDGE_WEIGHT_TYPE: GEO\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n3 2 2\n";
        let err = Instance::parse(text, InstanceFormat::Tsplib, None).unwrap_err();
        assert!(err.to_string().contains("unsupported format"));
    }

    #[test]
    fn closure_one_relaxation() {
        // c(0,1)=1, c(1,2)=1, c(0,2)=10 -> closes to 2
        let costs = vec![rat_int(1), rat_int(10), rat_int(1)];
        let inst = Instance::new("x", 3, 0, 2, costs).unwrap();
        assert_eq!(inst.cost(0, 2), &rat_int(2));
        assert!(inst.raw_costs().is_some());
    }

    #[test]
    fn closure_idempotent_and_leq() {
        let inst = Instance::random(17, 7, MetricKind::RandomClosure).unwrap();
        let once = inst.costs().to_vec();
        assert_eq!(metric_closure(7, &once), once);
    }

    #[test]
    fn negative_cost_rejected() {
        let costs = vec![rat_int(-1), rat_int(1), rat_int(1)];
        assert!(Instance::new("bad", 3, 0, 2, costs).is_err());
    }

    #[test]
    fn s_equals_t_rejected() {
        let costs = vec![rat_int(1), rat_int(1), rat_int(1)];
        assert!(Instance::new("bad", 3, 1, 1, costs).is_err());
    }

    #[test]
    fn brute_force_line() {
        let inst = Instance::line(4);
        let opt = inst.brute_force_opt(BRUTE_FORCE_CAP).unwrap();
        assert_eq!(opt.order, vec![0, 1, 2, 3]);
        assert_eq!(opt.cost, rat_int(3));
    }

    #[test]
    fn brute_force_n2() {
        let costs = vec![rat(7, 2)];
        let inst = Instance::new("pair", 2, 0, 1, costs).unwrap();
        let opt = inst.brute_force_opt(BRUTE_FORCE_CAP).unwrap();
        assert_eq!(opt.cost, rat(7, 2));
        assert_eq!(opt.order, vec![0, 1]);
    }

    #[test]
    fn brute_force_cap() {
        let inst = Instance::random(5, 13, MetricKind::Euclidean).unwrap();
        assert!(matches!(
            inst.brute_force_opt(12),
            Err(Error::BruteForceCap { n: 13, cap: 12 })
        ));
    }

    #[test]
    fn random_deterministic() {
        for kind in [
            MetricKind::Euclidean,
            MetricKind::GraphMetric,
            MetricKind::RandomClosure,
        ] {
            let a = Instance::random(42, 8, kind).unwrap();
            let b = Instance::random(42, 8, kind).unwrap();
            assert_eq!(a.costs(), b.costs());
            assert!(is_metric(8, a.costs()));
        }
    }

    #[test]
    fn graph_metric_positive_integers() {
        let inst = Instance::random(3, 9, MetricKind::GraphMetric).unwrap();
        assert!(inst.integral());
        assert!(inst.costs().iter().all(|c| c > &BigRational::zero()));
    }

    #[test]
    fn brute_force_relabel_invariant() {
        let inst = Instance::random(11, 7, MetricKind::Euclidean).unwrap();
        let opt = inst.brute_force_opt(BRUTE_FORCE_CAP).unwrap();
        let perm = vec![3, 0, 6, 2, 5, 1, 4];
        let relabeled = inst.relabel(&perm).unwrap();
        let opt2 = relabeled.brute_force_opt(BRUTE_FORCE_CAP).unwrap();
        assert_eq!(opt.cost, opt2.cost);
    }

    #[test]
    fn native_json_roundtrip() {
        let inst = Instance::random(9, 6, MetricKind::RandomClosure).unwrap();
        let json = inst.to_native_json();
        let back = Instance::parse(&json, InstanceFormat::NativeJson, None).unwrap();
        assert_eq!(inst.costs(), back.costs());
        assert_eq!(back.s(), 0);
        assert_eq!(back.t(), 5);
    }
}
