//! Certificates. Everything here runs in exact rational arithmetic no
//! matter how the costs arrived: a certificate that can fail from rounding
//! is not a certificate.
//!
//! For each tree S of the reassembled multiset we build an explicit point
//! y^S of the T_S-join polyhedron from the s-t path edges of S, the cut
//! structure, and a per-index weight γ (low for the first half of the
//! trees, high for the rest). The cost of y^S bounds the parity-correction
//! cost of S. A per-cut benefit audit then certifies the averaging
//! inequality that turns best-of-many into the final guarantee
//! best ≤ (2 - β + ε)·c(x*) with β = 3327/7654.

use crate::bits::BitSet;
use crate::cuts::NarrowCutChain;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::parity::wrong_parity_set;
use crate::ratio::{rat, rat_int, rat_to_f64};
use crate::reassembly::TreeMultiset;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exhaustive membership checks run up to this size (2^n subsets).
pub const MEMBERSHIP_EXHAUSTIVE_CAP: usize = 12;

#[derive(Clone, Debug)]
pub struct AnalysisParams {
    /// β = 3327/7654, so that β/(1-2β) = 3327/1000.
    pub beta: BigRational,
    /// δ = 63/500: the low tree weight.
    pub delta: BigRational,
    /// Rounding parameter the ensemble was built with.
    pub epsilon: BigRational,
}

impl AnalysisParams {
    pub fn standard(epsilon: BigRational) -> Self {
        let params = AnalysisParams {
            beta: rat(3327, 7654),
            delta: rat(63, 500),
            epsilon,
        };
        debug_assert!(params.beta < rat(1, 2) && !params.beta.is_negative());
        debug_assert!(params.delta < rat(1, 2) && !params.delta.is_negative());
        debug_assert_eq!(params.benefit_coeff(), rat(3327, 1000));
        params
    }

    /// β/(1-2β); equals 3.327 for the standard β.
    pub fn benefit_coeff(&self) -> BigRational {
        self.beta.clone() / (BigRational::one() - rat_int(2) * &self.beta)
    }

    /// 1-2β.
    pub fn one_minus_two_beta(&self) -> BigRational {
        BigRational::one() - rat_int(2) * &self.beta
    }

    /// γ for virtual index j: δ in the first half, 1-δ in the second.
    pub fn gamma(&self, j: u64, r: u64) -> BigRational {
        if j <= r / 2 {
            self.delta.clone()
        } else {
            BigRational::one() - &self.delta
        }
    }

    /// The guarantee factor 2 - β + ε.
    pub fn guarantee(&self) -> BigRational {
        rat_int(2) - &self.beta + &self.epsilon
    }
}

/// Per-tree, per-cut credit used to pay for parity correction.
pub fn benefit(
    crossings: usize,
    cut_value: &BigRational,
    gamma: &BigRational,
    params: &AnalysisParams,
) -> BigRational {
    if crossings == 1 {
        BigRational::one() - gamma
    } else if crossings % 2 == 0 {
        let scaled = params.benefit_coeff() * (rat_int(2) - cut_value - &params.epsilon);
        scaled.min(gamma.clone())
    } else {
        BigRational::zero()
    }
}

/// The explicit parity-correction bound for one tree under one γ.
#[derive(Clone, Debug)]
pub struct CorrectionVector {
    /// The path part I_S: edges of the s-t path inside S.
    pub path_edges: BitSet,
    /// J_S = S ∖ I_S, a T_S-join.
    pub join_edges: BitSet,
    /// The padding vector z^S.
    pub z: Vec<BigRational>,
    /// y^S = β(1+ε)x* + (1-2β)χ^{J_S} + z^S.
    pub y: Vec<BigRational>,
    pub y_cost: BigRational,
    pub gamma: BigRational,
}

/// Cheapest edge of a cut, ties by lowest edge id.
pub fn cheapest_cut_edge(inst: &Instance, cut: &BitSet) -> usize {
    let mut best: Option<usize> = None;
    for e in cut.iter() {
        match best {
            None => best = Some(e),
            Some(b) if inst.edge_cost(e) < inst.edge_cost(b) => best = Some(e),
            _ => {}
        }
    }
    best.expect("cuts are nonempty")
}

/// Build z^S and y^S for a tree under a fixed γ.
///
/// z^S puts (1-2β)γ on every s-t path edge and tops up the cheapest edge
/// of every narrow cut that S crosses evenly, so that
/// z^S(C) ≥ β(2 - x*(C) - ε) holds on those cuts; y^S then dominates the
/// T_S-join polyhedron constraints.
pub fn correction_vectors(
    inst: &Instance,
    tree: &BitSet,
    gamma: &BigRational,
    chain: &NarrowCutChain,
    params: &AnalysisParams,
    xstar: &[BigRational],
) -> Result<CorrectionVector> {
    let idx = inst.edge_index();
    let m = idx.m();
    let path_ids = idx.tree_path(tree, inst.s(), inst.t());
    let mut path_edges = idx.empty_edges();
    for e in path_ids {
        path_edges.insert(e);
    }
    let join_edges = tree.difference(&path_edges);

    // J_S must be a T_S-join: its odd-degree set is exactly T_S
    let t_set = wrong_parity_set(inst, tree);
    let mut join_odd = BitSet::new(inst.n());
    for v in 0..inst.n() {
        if idx.degree_in(&join_edges, v) % 2 == 1 {
            join_odd.insert(v);
        }
    }
    if join_odd != t_set {
        return Err(Error::Certificate(
            "tree minus its s-t path is not a join of the wrong-parity set".into(),
        ));
    }

    let omtb = params.one_minus_two_beta();
    let mut z = vec![BigRational::zero(); m];
    for e in path_edges.iter() {
        z[e] = omtb.clone() * gamma;
    }
    for i in 0..chain.len() {
        let cut = chain.cut_edge_set(i);
        let crossings = tree.intersection_count(cut);
        if crossings % 2 != 0 {
            continue;
        }
        let needed = params.beta.clone() * (rat_int(2) - chain.value(i) - &params.epsilon);
        let have = omtb.clone() * gamma;
        let top_up = needed.clone() - &have;
        if top_up.is_positive() {
            let e_c = cheapest_cut_edge(inst, cut);
            z[e_c] += top_up;
        }
        // the crossing edges of an even cut all lie on the path part
        let mut z_on_cut = BigRational::zero();
        for e in cut.iter() {
            z_on_cut += &z[e];
        }
        if z_on_cut < needed {
            return Err(Error::Certificate(format!(
                "padding on cut {i} is {z_on_cut}, below the required {needed}"
            )));
        }
    }

    let scale = params.beta.clone() * (BigRational::one() + &params.epsilon);
    let mut y = vec![BigRational::zero(); m];
    for e in 0..m {
        let mut acc = z[e].clone();
        if !xstar[e].is_zero() {
            acc += scale.clone() * &xstar[e];
        }
        if join_edges.contains(e) {
            acc += &omtb;
        }
        y[e] = acc;
    }
    let y_cost = inst.vector_cost(&y);
    Ok(CorrectionVector {
        path_edges,
        join_edges,
        z,
        y,
        y_cost,
        gamma: gamma.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipScope {
    /// All 2^n odd sets checked.
    Exhaustive,
    /// Only the narrow cuts were checked (n above the exhaustive cap).
    NarrowCutsOnly,
}

/// Verify y(δ(U)) ≥ 1 for every U with |U ∩ T| odd. Exhaustive up to
/// [`MEMBERSHIP_EXHAUSTIVE_CAP`] cities (f64 prefilter, exact confirmation),
/// narrow cuts only beyond that.
pub fn tjoin_polyhedron_check(
    inst: &Instance,
    y: &[BigRational],
    t_set: &BitSet,
    chain: &NarrowCutChain,
) -> Result<MembershipScope> {
    let idx = inst.edge_index();
    let n = inst.n();
    let one = BigRational::one();
    let exact_cut = |u_set: &BitSet| -> BigRational {
        let mut acc = BigRational::zero();
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if u_set.contains(a) != u_set.contains(b) {
                acc += &y[e];
            }
        }
        acc
    };

    if n > MEMBERSHIP_EXHAUSTIVE_CAP {
        for i in 0..chain.len() {
            let u = chain.level(i);
            if u.intersection_count(t_set) % 2 == 1 {
                let val = exact_cut(u);
                if val < one {
                    return Err(Error::Certificate(format!(
                        "y(δ(U_{i})) = {val} < 1 on a narrow cut"
                    )));
                }
            }
        }
        return Ok(MembershipScope::NarrowCutsOnly);
    }

    let y_f: Vec<f64> = y.iter().map(rat_to_f64).collect();
    for mask in 1usize..((1 << n) - 1) {
        let u_set = BitSet::from_iter(n, (0..n).filter(|&v| mask >> v & 1 == 1));
        if u_set.intersection_count(t_set) % 2 != 1 {
            continue;
        }
        let mut approx = 0.0;
        for e in 0..idx.m() {
            let (a, b) = idx.ends(e);
            if y_f[e] != 0.0 && u_set.contains(a) != u_set.contains(b) {
                approx += y_f[e];
            }
        }
        if approx >= 1.0 + 1e-6 {
            continue;
        }
        let val = exact_cut(&u_set);
        if val < one {
            return Err(Error::Certificate(format!(
                "y(δ({:?})) = {val} < 1",
                u_set.to_vec()
            )));
        }
    }
    Ok(MembershipScope::Exhaustive)
}

/// Per-cut audit of the averaging inequality.
#[derive(Clone, Debug)]
pub struct CutAudit {
    pub level: usize,
    pub value: BigRational,
    /// ξ = x*(C) + ε.
    pub xi: BigRational,
    pub theta: u64,
    /// π: fraction of trees crossing the cut evenly.
    pub even_fraction: BigRational,
    /// (1/r)·Σ_j benefit(S_j, C).
    pub benefit_avg: BigRational,
    /// 3.327·(2 - x*(C) - ε)·π.
    pub required: BigRational,
    pub pass: bool,
    /// π ≤ ξ - 1.
    pub pi_bound_ok: bool,
}

/// Audit every narrow cut: the average benefit must dominate
/// 3.327·(2 - x*(C_i) - ε)·π in exact arithmetic. A failing cut is a hard
/// error; the guarantee's proof shows it cannot fail on a correctly
/// reassembled multiset.
pub fn check_benefit_inequality(
    ms: &TreeMultiset,
    chain: &NarrowCutChain,
    thresholds: &[u64],
    params: &AnalysisParams,
) -> Result<Vec<CutAudit>> {
    let r = ms.r;
    let r_rat = rat_int(r as i64);
    let half = r / 2;
    let mut audits = Vec::with_capacity(chain.len());
    for i in 0..chain.len() {
        let cut = chain.cut_edge_set(i);
        let value = chain.value(i).clone();
        let mut benefit_sum = BigRational::zero();
        let mut even_count = 0u64;
        let mut start = 1u64;
        for (tree, mult) in &ms.blocks {
            let end = start + mult - 1;
            let crossings = tree.intersection_count(cut);
            if crossings % 2 == 0 {
                even_count += mult;
            }
            // split the block at the γ boundary r/2
            let low = if start > half {
                0
            } else {
                (end.min(half)) - start + 1
            };
            let high = mult - low;
            if low > 0 {
                benefit_sum += rat_int(low as i64)
                    * benefit(crossings, &value, &params.delta, params);
            }
            if high > 0 {
                let gamma_high = BigRational::one() - &params.delta;
                benefit_sum +=
                    rat_int(high as i64) * benefit(crossings, &value, &gamma_high, params);
            }
            start = end + 1;
        }
        let benefit_avg = benefit_sum / &r_rat;
        let even_fraction = rat_int(even_count as i64) / &r_rat;
        let required = params.benefit_coeff()
            * (rat_int(2) - &value - &params.epsilon)
            * &even_fraction;
        let xi = value.clone() + &params.epsilon;
        let pass = benefit_avg >= required;
        let pi_bound_ok =
            even_fraction.is_zero() || even_fraction <= xi.clone() - BigRational::one();
        if !pass || !pi_bound_ok {
            return Err(Error::Certificate(format!(
                "benefit audit failed at cut {i}: avg {benefit_avg} vs required {required}, π = {even_fraction}, ξ = {xi}"
            )));
        }
        audits.push(CutAudit {
            level: i,
            value,
            xi,
            theta: thresholds[i],
            even_fraction,
            benefit_avg,
            required,
            pass,
            pi_bound_ok,
        });
    }
    Ok(audits)
}

/// Scalar aggregates entering the final bound.
#[derive(Clone, Debug)]
pub struct BoundInputs {
    /// c(x*): the LP optimum.
    pub lp_value: BigRational,
    /// c(x): cost of the renormalized rounded vector.
    pub rounded_cost: BigRational,
    /// Σ p'.
    pub sum_p_prime: BigRational,
    /// Best tour cost over all candidates.
    pub best_cost: BigRational,
    /// min over virtual trees of c(S_j) + c(y^{S_j}).
    pub min_tree_plus_y: BigRational,
    /// (1/r)·Σ_j c(y^{S_j}).
    pub avg_y_cost: BigRational,
    /// min over leftover trees of c(S) + c(x*), if any leftover exists.
    pub min_leftover_anchor: Option<BigRational>,
}

#[derive(Clone, Debug)]
pub struct BoundCertificate {
    pub inputs: BoundInputs,
    /// 2 - β + ε.
    pub guarantee: BigRational,
    /// best / lp.
    pub ratio: BigRational,
    /// best ≤ min(min_j(c+y), min_leftover).
    pub anchor_ok: bool,
    /// avg y cost ≤ (β + εβ)c(x*) + (1-2β)c(x).
    pub averaging_ok: bool,
    /// c(x) ≤ c(x*)/Σp'.
    pub rounding_ok: bool,
    /// best ≤ (2 - β + ε)·c(x*).
    pub bound_ok: bool,
}

/// Check every link of the averaging argument and the headline bound.
/// Violations are hard errors: the proof guarantees them, so a failure
/// means an implementation bug upstream.
pub fn bound_report(inputs: BoundInputs, params: &AnalysisParams) -> Result<BoundCertificate> {
    let anchor = match &inputs.min_leftover_anchor {
        Some(l) => inputs.min_tree_plus_y.clone().min(l.clone()),
        None => inputs.min_tree_plus_y.clone(),
    };
    let anchor_ok = inputs.best_cost <= anchor;

    let averaging_rhs = (params.beta.clone() + params.beta.clone() * &params.epsilon)
        * &inputs.lp_value
        + params.one_minus_two_beta() * &inputs.rounded_cost;
    let averaging_ok = inputs.avg_y_cost <= averaging_rhs;

    let rounding_ok =
        inputs.rounded_cost <= inputs.lp_value.clone() / inputs.sum_p_prime.clone();

    let guarantee = params.guarantee();
    let bound_ok = inputs.best_cost <= guarantee.clone() * &inputs.lp_value;

    if !anchor_ok || !averaging_ok || !rounding_ok || !bound_ok {
        return Err(Error::Certificate(format!(
            "bound chain broken: anchor_ok={anchor_ok}, averaging_ok={averaging_ok}, \
             rounding_ok={rounding_ok}, bound_ok={bound_ok} \
             (best {}, lp {}, guarantee {})",
            inputs.best_cost, inputs.lp_value, guarantee
        )));
    }
    let ratio = if inputs.lp_value.is_zero() {
        BigRational::one()
    } else {
        inputs.best_cost.clone() / &inputs.lp_value
    };
    Ok(BoundCertificate {
        inputs,
        guarantee,
        ratio,
        anchor_ok,
        averaging_ok,
        rounding_ok,
        bound_ok,
    })
}

/// When the first tree is a global single-crosser, (1/2)x* lies in its
/// T-join polyhedron (checked exhaustively up to the cap).
pub fn half_lp_membership(
    inst: &Instance,
    xstar: &[BigRational],
    tree: &BitSet,
    chain: &NarrowCutChain,
) -> Result<MembershipScope> {
    let half = rat(1, 2);
    let y: Vec<BigRational> = xstar.iter().map(|v| v * &half).collect();
    let t_set = wrong_parity_set(inst, tree);
    tjoin_polyhedron_check(inst, &y, &t_set, chain)
}

/// Does the tree cross every narrow cut exactly once?
pub fn is_global_single_crosser(tree: &BitSet, chain: &NarrowCutChain) -> bool {
    (0..chain.len()).all(|i| tree.intersection_count(chain.cut_edge_set(i)) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::narrow_cuts;
    use crate::instance::{Instance, MetricKind};
    use crate::lp::{solve_relaxation, ArithMode};
    use crate::parity::{min_tjoin, MATCHING_CAP};

    #[test]
    fn params_fixed_point() {
        let p = AnalysisParams::standard(BigRational::zero());
        assert_eq!(p.benefit_coeff(), rat(3327, 1000));
        assert_eq!(p.beta, rat(3327, 7654));
        // β > 0.434 + 0.0006
        assert!(p.beta > rat(4346, 10000));
        // guarantee at ε ≤ 0.0006 stays within 1.566
        let p2 = AnalysisParams::standard(rat(6, 10000));
        assert!(p2.guarantee() <= rat(1566, 1000));
    }

    #[test]
    fn benefit_cases() {
        let p = AnalysisParams::standard(BigRational::zero());
        // single crossing with γ = 0.126 earns 0.874
        let b = benefit(1, &rat(3, 2), &rat(126, 1000), &p);
        assert_eq!(b, rat(874, 1000));
        // odd crossings beyond one earn nothing
        assert_eq!(benefit(3, &rat(3, 2), &rat(126, 1000), &p), rat_int(0));
        // even crossing at x*(C) = 1.9: min{3.327·0.1, 0.874} = 0.3327
        let b = benefit(2, &rat(19, 10), &rat(874, 1000), &p);
        assert_eq!(b, rat(3327, 10000));
    }

    #[test]
    fn path_tree_correction_vector() {
        // Hamiltonian path: J_S empty, no even narrow cuts, so z is
        // (1-2β)γ on path edges and c(y) = β(1+ε)·c(x*) + (1-2β)γ·c(path)
        let inst = Instance::line(4);
        let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
        let chain = narrow_cuts(&sol, &inst).unwrap();
        let idx = inst.edge_index();
        let mut tree = idx.empty_edges();
        for v in 0..3 {
            tree.insert(idx.id(v, v + 1));
        }
        let p = AnalysisParams::standard(BigRational::zero());
        let gamma = p.delta.clone();
        let cv = correction_vectors(&inst, &tree, &gamma, &chain, &p, &sol.x).unwrap();
        assert!(cv.join_edges.is_empty());
        let expected =
            p.beta.clone() * rat_int(3) + p.one_minus_two_beta() * gamma.clone() * rat_int(3);
        assert_eq!(cv.y_cost, expected);
        // z sits on path edges only
        for e in 0..idx.m() {
            if cv.path_edges.contains(e) {
                assert_eq!(cv.z[e], p.one_minus_two_beta() * gamma.clone());
            } else {
                assert_eq!(cv.z[e], rat_int(0));
            }
        }
    }

    #[test]
    fn join_cost_bounded_by_y_cost() {
        // the whole point of y: it dominates the join polyhedron, so the
        // minimum join can never cost more
        for seed in [2u64, 8, 19] {
            let inst = Instance::random(seed, 8, MetricKind::Euclidean).unwrap();
            let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
            let chain = narrow_cuts(&sol, &inst).unwrap();
            let dist = crate::decompose::decompose(&sol.x, &inst).unwrap();
            let p = AnalysisParams::standard(BigRational::zero());
            for (tree, _) in &dist.blocks {
                for gamma in [p.delta.clone(), BigRational::one() - &p.delta] {
                    let cv =
                        correction_vectors(&inst, tree, &gamma, &chain, &p, &sol.x).unwrap();
                    let t_set = wrong_parity_set(&inst, tree);
                    let scope =
                        tjoin_polyhedron_check(&inst, &cv.y, &t_set, &chain).unwrap();
                    assert_eq!(scope, MembershipScope::Exhaustive);
                    let join = min_tjoin(&inst, &t_set, MATCHING_CAP).unwrap();
                    assert!(
                        join.cost <= cv.y_cost,
                        "join {} > y {} on seed {seed}",
                        join.cost,
                        cv.y_cost
                    );
                }
            }
        }
    }

    #[test]
    fn membership_rejects_bad_vector() {
        let inst = Instance::line(4);
        let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
        let chain = narrow_cuts(&sol, &inst).unwrap();
        let t_set = BitSet::from_iter(4, [1, 2]);
        let y = vec![BigRational::zero(); inst.edge_index().m()];
        assert!(tjoin_polyhedron_check(&inst, &y, &t_set, &chain).is_err());
    }

    #[test]
    fn audits_pass_on_integral_run() {
        // integral optimum: one tree crossing every cut once, π = 0
        let inst = Instance::line(5);
        let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
        let chain = narrow_cuts(&sol, &inst).unwrap();
        let dist = crate::decompose::decompose(&sol.x, &inst).unwrap();
        let ens = crate::decompose::exact_ensemble(&dist, 1_000_000, &inst).unwrap();
        let thr =
            crate::reassembly::prefix_thresholds(&chain, ens.r, &ens.epsilon).unwrap();
        let idx = inst.edge_index();
        let (out, _, _) = crate::reassembly::reassemble(&ens, &chain, &thr, idx).unwrap();
        let p = AnalysisParams::standard(BigRational::zero());
        let audits = check_benefit_inequality(&out, &chain, &thr.required, &p).unwrap();
        for audit in &audits {
            assert!(audit.pass);
            assert!(audit.even_fraction.is_zero());
        }
    }

    #[test]
    fn bound_report_flags_violation() {
        let p = AnalysisParams::standard(BigRational::zero());
        let inputs = BoundInputs {
            lp_value: rat_int(10),
            rounded_cost: rat_int(10),
            sum_p_prime: BigRational::one(),
            best_cost: rat_int(100), // way past the guarantee
            min_tree_plus_y: rat_int(100),
            avg_y_cost: rat_int(1),
            min_leftover_anchor: None,
        };
        assert!(bound_report(inputs, &p).is_err());
    }

    #[test]
    fn global_single_crosser_and_half_lp() {
        let inst = Instance::line(5);
        let sol = solve_relaxation(&inst, ArithMode::Exact).unwrap();
        let chain = narrow_cuts(&sol, &inst).unwrap();
        let idx = inst.edge_index();
        let mut tree = idx.empty_edges();
        for v in 0..4 {
            tree.insert(idx.id(v, v + 1));
        }
        assert!(is_global_single_crosser(&tree, &chain));
        let scope = half_lp_membership(&inst, &sol.x, &tree, &chain).unwrap();
        assert_eq!(scope, MembershipScope::Exhaustive);
    }
}
