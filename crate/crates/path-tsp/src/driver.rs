//! Pipeline orchestration: run configuration, the full solve, independent
//! re-verification from serialized artifacts, and the batch runner.

use crate::analysis::{
    bound_report, check_benefit_inequality, correction_vectors, half_lp_membership,
    is_global_single_crosser, tjoin_polyhedron_check, AnalysisParams, BoundInputs,
    CorrectionVector, MembershipScope,
};
use crate::bits::BitSet;
use crate::cuts::narrow_cuts;
use crate::decompose::{
    decompose, exact_ensemble, round_distribution, verify_combination, RoundedEnsemble,
    TreeDistribution,
};
use crate::error::{Error, Result};
use crate::instance::{HamPath, Instance, MetricKind, BRUTE_FORCE_CAP};
use crate::lp::{check_feasible, solve_relaxation, ArithMode, FractionalSolution};
use crate::parity::{assemble_tour, min_tjoin, wrong_parity_set, TourCandidate, MATCHING_CAP};
use crate::ratio::{rat_from_str, rat_int, rat_to_string, RatJson};
use crate::reassembly::{
    prefix_thresholds, reassemble, replay, verify_structure, ExchangeTrace,
    TreeMultiset,
};
use crate::report::{
    AuditReport, Certificates, CutReport, InstanceSummary, RunStats, TourReport,
};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::path::Path;

/// Default denominator cap for exact (ε = 0) runs.
pub const DEFAULT_EXACT_DEN_CAP: u64 = 5_000_000;
/// The default ε targets r ≤ this.
pub const DEFAULT_R_TARGET: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// None: pick ε so that r stays below [`DEFAULT_R_TARGET`].
    /// Some(0): exact mode (requires small decomposition denominators).
    pub epsilon_request: Option<BigRational>,
    /// Force rational LP pivoting even on float-cost instances.
    pub force_exact_lp: bool,
    pub max_brute_n: usize,
    pub matching_cap: usize,
    pub exact_den_cap: u64,
    /// Compute the brute-force optimum when n allows it.
    pub compute_opt: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon_request: None,
            force_exact_lp: false,
            max_brute_n: BRUTE_FORCE_CAP,
            matching_cap: MATCHING_CAP,
            exact_den_cap: DEFAULT_EXACT_DEN_CAP,
            compute_opt: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_brute_n == 0 || self.matching_cap == 0 || self.exact_den_cap == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        if let Some(eps) = &self.epsilon_request {
            if eps.is_negative() {
                return Err(Error::Config("ε must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Everything a solve produces, including the intermediate artifacts
/// needed for independent re-verification.
pub struct SolveOutcome {
    pub report: TourReport,
    pub best: HamPath,
    pub xstar: FractionalSolution,
    pub distribution: TreeDistribution,
    pub ensemble_in: RoundedEnsemble,
    pub trace: ExchangeTrace,
    pub ensemble_out: TreeMultiset,
}

struct BlockWork {
    tree: BitSet,
    start: u64,
    mult: u64,
}

struct BlockResult {
    tour: TourCandidate,
    /// (virtual copies, correction vector) per γ variant present.
    corrections: Vec<(u64, CorrectionVector)>,
    membership: MembershipScope,
}

/// Run the full pipeline on one instance.
pub fn cmd_solve(inst: &Instance, cfg: &RunConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let idx = inst.edge_index();
    let n = inst.n();

    // 1. relaxation (exact extreme point either way)
    let mode = if cfg.force_exact_lp || inst.integral() {
        ArithMode::Exact
    } else {
        ArithMode::Float
    };
    let xstar = solve_relaxation(inst, mode)?;

    // 2. narrow cuts
    let chain = narrow_cuts(&xstar, inst)?;

    // 3. convex combination of spanning trees
    let distribution = decompose(&xstar.x, inst)?;
    debug_assert!(verify_combination(
        &distribution,
        &xstar.x,
        idx,
        &BigRational::zero()
    ));

    // 4. rounding
    let ensemble_in = match &cfg.epsilon_request {
        Some(eps) if eps.is_zero() => exact_ensemble(&distribution, cfg.exact_den_cap, inst)?,
        Some(eps) => round_distribution(&distribution, eps, inst)?,
        None => {
            let n3 = rat_int((n * n * n) as i64);
            let eps = n3 / rat_int((DEFAULT_R_TARGET / 2) as i64);
            round_distribution(&distribution, &eps, inst)?
        }
    };
    let exact_mode = ensemble_in.epsilon.is_zero();

    // 5. thresholds and reassembly (structure verified independently inside)
    let thr = prefix_thresholds(&chain, ensemble_in.r, &ensemble_in.epsilon)?;
    let (ensemble_out, trace, stats) = reassemble(&ensemble_in, &chain, &thr, idx)?;
    let structure_ok =
        verify_structure(&ensemble_out, &ensemble_in.x, &chain, &thr, idx).is_ok();
    if !structure_ok {
        return Err(Error::Verify("independent structure check failed".into()));
    }

    let params = AnalysisParams::standard(ensemble_in.epsilon.clone());
    let r = ensemble_in.r;
    let half = r / 2;

    // 6. parity fan-out over the distinct blocks (independent, parallel)
    let mut works = Vec::new();
    {
        let mut start = 1u64;
        for (tree, mult) in &ensemble_out.blocks {
            works.push(BlockWork {
                tree: tree.clone(),
                start,
                mult: *mult,
            });
            start += mult;
        }
    }
    let block_results: Vec<BlockResult> = works
        .par_iter()
        .map(|work| -> Result<BlockResult> {
            let t_set = wrong_parity_set(inst, &work.tree);
            let join = min_tjoin(inst, &t_set, cfg.matching_cap)?;
            let tour = assemble_tour(inst, &work.tree, &join)?;
            let end = work.start + work.mult - 1;
            let low = if work.start > half {
                0
            } else {
                end.min(half) - work.start + 1
            };
            let high = work.mult - low;
            let mut corrections = Vec::new();
            let mut membership = MembershipScope::Exhaustive;
            for (count, gamma) in [
                (low, params.delta.clone()),
                (high, BigRational::one() - &params.delta),
            ] {
                if count == 0 {
                    continue;
                }
                let cv = correction_vectors(inst, &work.tree, &gamma, &chain, &params, &xstar.x)?;
                membership = tjoin_polyhedron_check(inst, &cv.y, &t_set, &chain)?;
                if join.cost > cv.y_cost {
                    return Err(Error::Certificate(format!(
                        "join cost {} exceeds its polyhedron bound {}",
                        join.cost, cv.y_cost
                    )));
                }
                corrections.push((count, cv));
            }
            Ok(BlockResult {
                tour,
                corrections,
                membership,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // leftover trees are parity-corrected too, with x* as their bound
    let leftover_results: Vec<TourCandidate> = ensemble_in
        .leftover
        .blocks
        .par_iter()
        .map(|(tree, _)| -> Result<TourCandidate> {
            let t_set = wrong_parity_set(inst, tree);
            let join = min_tjoin(inst, &t_set, cfg.matching_cap)?;
            if join.cost > xstar.value {
                return Err(Error::Certificate(format!(
                    "leftover join cost {} exceeds c(x*) = {}",
                    join.cost, xstar.value
                )));
            }
            assemble_tour(inst, tree, &join)
        })
        .collect::<Result<Vec<_>>>()?;

    // 7. aggregates for the averaging chain
    let mut best: Option<&TourCandidate> = None;
    for cand in block_results
        .iter()
        .map(|b| &b.tour)
        .chain(leftover_results.iter())
    {
        if best.is_none_or(|cur| cand.path.cost < cur.path.cost) {
            best = Some(cand);
        }
    }
    let best = best
        .ok_or_else(|| Error::Certificate("no tour candidates produced".into()))?
        .clone();

    let mut min_tree_plus_y: Option<BigRational> = None;
    let mut avg_y_acc = BigRational::zero();
    for block in &block_results {
        for (count, cv) in &block.corrections {
            let total = block.tour.tree_cost.clone() + &cv.y_cost;
            if min_tree_plus_y.as_ref().is_none_or(|cur| total < *cur) {
                min_tree_plus_y = Some(total);
            }
            avg_y_acc += rat_int(*count as i64) * &cv.y_cost;
        }
    }
    let min_tree_plus_y =
        min_tree_plus_y.ok_or_else(|| Error::Certificate("no reassembled candidates".into()))?;
    let avg_y_cost = avg_y_acc / rat_int(r as i64);
    let min_leftover_anchor = leftover_results
        .iter()
        .map(|cand| cand.tree_cost.clone() + &xstar.value)
        .min();

    let rounded_cost = inst.vector_cost(&ensemble_in.x);
    let audits = check_benefit_inequality(&ensemble_out, &chain, &thr.required, &params)?;
    let benefit_ok = audits.iter().all(|a| a.pass && a.pi_bound_ok);

    let membership_scope = block_results
        .iter()
        .map(|b| b.membership)
        .fold(MembershipScope::Exhaustive, |acc, s| {
            if s == MembershipScope::NarrowCutsOnly {
                s
            } else {
                acc
            }
        });

    let bound = bound_report(
        BoundInputs {
            lp_value: xstar.value.clone(),
            rounded_cost,
            sum_p_prime: ensemble_in.sum_p_prime.clone(),
            best_cost: best.path.cost.clone(),
            min_tree_plus_y,
            avg_y_cost,
            min_leftover_anchor,
        },
        &params,
    )?;

    // 8. corollary checks
    let first_tree = &ensemble_out.blocks[0].0;
    let first_tree_single_crosser = if exact_mode {
        let ok = is_global_single_crosser(first_tree, &chain);
        if !ok {
            return Err(Error::Certificate(
                "exact mode must leave a global single-crosser in front".into(),
            ));
        }
        Some(true)
    } else {
        None
    };
    let half_lp = if is_global_single_crosser(first_tree, &chain) {
        Some(half_lp_membership(inst, &xstar.x, first_tree, &chain)?)
    } else {
        None
    };

    // 9. optional exact optimum
    let (opt_cost, ratio_opt) = if cfg.compute_opt && n <= cfg.max_brute_n {
        let opt = inst.brute_force_opt(cfg.max_brute_n)?;
        if best.path.cost < opt.cost {
            return Err(Error::Certificate(
                "tour beat the exhaustive optimum; oracle bug".into(),
            ));
        }
        let ratio = best.path.cost.clone() / &opt.cost;
        (Some(opt.cost), Some(ratio))
    } else {
        (None, None)
    };

    let report = TourReport {
        instance: InstanceSummary {
            name: inst.name().to_string(),
            n,
            s: inst.s(),
            t: inst.t(),
            integral_costs: inst.integral(),
            metric_closure_applied: inst.raw_costs().is_some(),
        },
        lp_value: RatJson::of(&xstar.value),
        ell: chain.ell(),
        cuts: chain
            .level_sizes_and_values()
            .iter()
            .zip(audits.iter())
            .map(|((size, value), audit)| CutReport {
                size: *size,
                value: RatJson::of(value),
                theta: audit.theta,
                audit: AuditReport::of(audit),
            })
            .collect(),
        r,
        epsilon: RatJson::of(&ensemble_in.epsilon),
        beta: RatJson::of(&params.beta),
        delta: RatJson::of(&params.delta),
        num_blocks_peak: stats.peak_blocks,
        best_cost: RatJson::of(&best.path.cost),
        opt_cost: opt_cost.as_ref().map(RatJson::of),
        ratio_lp: RatJson::of(&bound.ratio),
        ratio_opt: ratio_opt.as_ref().map(RatJson::of),
        guarantee: RatJson::of(&bound.guarantee),
        certificates: Certificates {
            structure: structure_ok,
            benefit: benefit_ok,
            tjoin_polyhedron: membership_scope,
            bound: bound.bound_ok && bound.anchor_ok && bound.averaging_ok && bound.rounding_ok,
            first_tree_single_crosser,
            half_lp_in_join_polyhedron: half_lp,
            boundary_cuts: chain.boundary_count(),
        },
        best_order: best.path.order.clone(),
        stats: RunStats {
            swap_records: stats.swap_records,
            processed_copies: stats.processed_copies,
            replayed_copies: stats.replayed_copies,
            bulk_copies: stats.bulk_copies,
            num_blocks_final: ensemble_out.blocks.len(),
            leftover_blocks: ensemble_in.leftover.len(),
            candidates: block_results.len() + leftover_results.len(),
        },
    };

    Ok(SolveOutcome {
        report,
        best: best.path,
        xstar,
        distribution,
        ensemble_in,
        trace,
        ensemble_out,
    })
}

// ---------------------------------------------------------------------------
// artifacts

fn multiset_to_json(blocks: &[(BitSet, u64)], r: u64, idx: &crate::graph::EdgeIndex) -> String {
    let blocks: Vec<serde_json::Value> = blocks
        .iter()
        .map(|(tree, mult)| {
            let edges: Vec<[usize; 2]> = tree
                .iter()
                .map(|e| {
                    let (u, v) = idx.ends(e);
                    [u, v]
                })
                .collect();
            serde_json::json!({"edges": edges, "mult": mult})
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({"r": r, "blocks": blocks}))
        .expect("serialization cannot fail")
}

fn multiset_from_json(text: &str, idx: &crate::graph::EdgeIndex) -> Result<TreeMultiset> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let r = v
        .get("r")
        .and_then(|r| r.as_u64())
        .ok_or_else(|| Error::Parse("missing r".into()))?;
    let mut blocks = Vec::new();
    for item in v
        .get("blocks")
        .and_then(|b| b.as_array())
        .ok_or_else(|| Error::Parse("missing blocks".into()))?
    {
        let mut tree = idx.empty_edges();
        for pair in item
            .get("edges")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Parse("missing edges".into()))?
        {
            let u = pair[0].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
            let w = pair[1].as_u64().ok_or_else(|| Error::Parse("bad edge".into()))? as usize;
            tree.insert(idx.id(u, w));
        }
        let mult = item
            .get("mult")
            .and_then(|m| m.as_u64())
            .ok_or_else(|| Error::Parse("missing mult".into()))?;
        blocks.push((tree, mult));
    }
    Ok(TreeMultiset { blocks, r })
}

/// Artifact filenames inside an artifacts directory.
pub mod artifact_names {
    pub const INSTANCE: &str = "instance.json";
    pub const XSTAR: &str = "xstar.json";
    pub const DISTRIBUTION: &str = "distribution.json";
    pub const ENSEMBLE_IN: &str = "ensemble_in.json";
    pub const TRACE: &str = "trace.jsonl";
    pub const ENSEMBLE_OUT: &str = "ensemble_out.json";
    pub const REPORT: &str = "report.json";
    pub const EPSILON: &str = "epsilon.txt";
}

impl SolveOutcome {
    /// Write the re-verification artifact set.
    pub fn save_artifacts(&self, dir: &Path, inst: &Instance) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let idx = inst.edge_index();
        std::fs::write(dir.join(artifact_names::INSTANCE), inst.to_native_json())?;
        std::fs::write(dir.join(artifact_names::XSTAR), self.xstar.to_json(inst))?;
        std::fs::write(
            dir.join(artifact_names::DISTRIBUTION),
            self.distribution.to_json(idx),
        )?;
        std::fs::write(
            dir.join(artifact_names::ENSEMBLE_IN),
            multiset_to_json(&self.ensemble_in.blocks, self.ensemble_in.r, idx),
        )?;
        std::fs::write(dir.join(artifact_names::TRACE), self.trace.to_jsonl())?;
        std::fs::write(
            dir.join(artifact_names::ENSEMBLE_OUT),
            multiset_to_json(&self.ensemble_out.blocks, self.ensemble_out.r, idx),
        )?;
        std::fs::write(dir.join(artifact_names::REPORT), self.report.to_json())?;
        std::fs::write(
            dir.join(artifact_names::EPSILON),
            rat_to_string(&self.ensemble_in.epsilon),
        )?;
        Ok(())
    }
}

/// Re-verify a run from its serialized artifacts alone: LP feasibility,
/// the combination identity, trace replay, the structural prefix property,
/// and the benefit audits are all recomputed from the files.
pub fn cmd_verify(dir: &Path) -> Result<()> {
    let read = |name: &str| -> Result<String> {
        std::fs::read_to_string(dir.join(name))
            .map_err(|e| Error::Verify(format!("cannot read {name}: {e}")))
    };
    let inst = Instance::parse(
        &read(artifact_names::INSTANCE)?,
        crate::instance::InstanceFormat::NativeJson,
        None,
    )?;
    let idx = inst.edge_index();
    let xstar = FractionalSolution::from_json(&read(artifact_names::XSTAR)?, &inst)?;
    let report = TourReport::from_json(&read(artifact_names::REPORT)?)?;
    let epsilon = rat_from_str(read(artifact_names::EPSILON)?.trim())
        .ok_or_else(|| Error::Verify("bad epsilon artifact".into()))?;

    // the relaxation point must be feasible and match the reported value
    let feas = check_feasible(&xstar.x, &inst, &BigRational::zero());
    if !feas.feasible {
        return Err(Error::Verify(format!(
            "serialized x* infeasible: worst violation {}",
            feas.worst_violation()
        )));
    }
    let reported_lp = report
        .lp_value
        .to_rat()
        .ok_or_else(|| Error::Verify("unparseable lp_value".into()))?;
    if reported_lp != xstar.value {
        return Err(Error::Verify(format!(
            "report lp value {} does not match x* cost {}",
            report.lp_value.exact, xstar.value
        )));
    }

    // combination identity
    let distribution = TreeDistribution::from_json(&read(artifact_names::DISTRIBUTION)?, idx)?;
    if !verify_combination(&distribution, &xstar.x, idx, &BigRational::zero()) {
        return Err(Error::Verify(
            "distribution does not reproduce x* exactly".into(),
        ));
    }

    // chain and thresholds recomputed from scratch
    let chain = narrow_cuts(&xstar, &inst)?;
    if chain.ell() != report.ell {
        return Err(Error::Verify(format!(
            "chain length {} differs from reported {}",
            chain.ell(),
            report.ell
        )));
    }
    let ensemble_in = multiset_from_json(&read(artifact_names::ENSEMBLE_IN)?, idx)?;
    if ensemble_in.r != report.r {
        return Err(Error::Verify("ensemble r differs from report".into()));
    }
    let thr = prefix_thresholds(&chain, ensemble_in.r, &epsilon)?;

    // trace replay must land exactly on the serialized output
    let trace = ExchangeTrace::from_jsonl(&read(artifact_names::TRACE)?)?;
    let mut ensemble_out = multiset_from_json(&read(artifact_names::ENSEMBLE_OUT)?, idx)?;
    ensemble_out.coalesce();
    let replayed = replay(&ensemble_in, &trace, idx)
        .map_err(|e| Error::Verify(format!("trace replay failed: {e}")))?;
    if replayed != ensemble_out {
        return Err(Error::Verify("trace replay mismatch".into()));
    }

    // structural prefix property against the input ensemble's vector
    let x_in = ensemble_in.edge_vector(idx.m());
    verify_structure(&ensemble_out, &x_in, &chain, &thr, idx)?;

    // audits
    let params = AnalysisParams::standard(epsilon);
    let audits = check_benefit_inequality(&ensemble_out, &chain, &thr.required, &params)?;
    if audits.iter().any(|a| !a.pass || !a.pi_bound_ok) {
        return Err(Error::Verify("benefit audit failed on replay".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// batch

#[derive(Clone, Debug)]
pub struct BatchItem {
    pub seed: u64,
    pub n: usize,
    pub kind: MetricKind,
}

#[derive(Clone, Debug, Default)]
pub struct BatchStats {
    pub runs: usize,
    pub failures: Vec<(String, String)>,
    /// (exact string, float) of the worst ratio vs LP.
    pub max_ratio_lp: Option<(String, f64)>,
    pub mean_ratio_lp: Option<f64>,
    /// Smallest benefit slack across all cuts of all runs.
    pub worst_cut_margin: Option<f64>,
}

impl BatchStats {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run many independent solves concurrently and aggregate the ratios.
pub fn cmd_batch(items: &[BatchItem], cfg: &RunConfig) -> BatchStats {
    let results: Vec<(String, Result<TourReport>)> = items
        .par_iter()
        .map(|item| {
            let label = format!("seed={} n={} kind={:?}", item.seed, item.n, item.kind);
            let run = Instance::random(item.seed, item.n, item.kind)
                .and_then(|inst| cmd_solve(&inst, cfg))
                .map(|outcome| outcome.report);
            (label, run)
        })
        .collect();

    let mut stats = BatchStats {
        runs: results.len(),
        ..Default::default()
    };
    let mut ratio_sum = 0.0;
    let mut ratio_count = 0usize;
    let mut max_ratio: Option<BigRational> = None;
    for (label, res) in results {
        match res {
            Err(e) => stats.failures.push((label, e.to_string())),
            Ok(report) => {
                if !report.all_certificates_pass() {
                    stats
                        .failures
                        .push((label, "certificate failed".to_string()));
                    continue;
                }
                let ratio = report
                    .ratio_lp
                    .to_rat()
                    .expect("reports carry exact ratios");
                ratio_sum += report.ratio_lp.approx;
                ratio_count += 1;
                if max_ratio.as_ref().is_none_or(|m| ratio > *m) {
                    max_ratio = Some(ratio);
                }
                if let Some(margin) = report.cut_margin() {
                    if stats.worst_cut_margin.is_none_or(|w| margin < w) {
                        stats.worst_cut_margin = Some(margin);
                    }
                }
            }
        }
    }
    if ratio_count > 0 {
        stats.mean_ratio_lp = Some(ratio_sum / ratio_count as f64);
    }
    stats.max_ratio_lp =
        max_ratio.map(|m| (rat_to_string(&m), crate::ratio::rat_to_f64(&m)));
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn solve_line4_is_tight() {
        let inst = Instance::line(4);
        let outcome = cmd_solve(&inst, &RunConfig::default()).unwrap();
        assert_eq!(outcome.best.cost, rat_int(3));
        assert_eq!(outcome.report.ratio_lp.approx, 1.0);
        assert!(outcome.report.all_certificates_pass());
        assert_eq!(outcome.report.ratio_opt.as_ref().unwrap().approx, 1.0);
    }

    #[test]
    fn solve_random_within_guarantee() {
        for seed in [7u64, 23] {
            let inst = Instance::random(seed, 8, MetricKind::Euclidean).unwrap();
            let cfg = RunConfig {
                epsilon_request: Some(rat(1, 2)),
                ..RunConfig::default()
            };
            let outcome = cmd_solve(&inst, &cfg).unwrap();
            let report = &outcome.report;
            assert!(report.all_certificates_pass());
            let ratio = report.ratio_lp.to_rat().unwrap();
            let guarantee = report.guarantee.to_rat().unwrap();
            assert!(ratio <= guarantee);
            if let Some(opt) = &report.ratio_opt {
                assert!(opt.to_rat().unwrap() >= BigRational::one());
            }
        }
    }

    #[test]
    fn artifacts_roundtrip_verify() {
        let inst = Instance::random(11, 7, MetricKind::GraphMetric).unwrap();
        let cfg = RunConfig {
            epsilon_request: Some(rat(1, 2)),
            ..RunConfig::default()
        };
        let outcome = cmd_solve(&inst, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        outcome.save_artifacts(dir.path(), &inst).unwrap();
        cmd_verify(dir.path()).unwrap();
    }

    #[test]
    fn verify_detects_tampered_tree() {
        let inst = Instance::random(13, 7, MetricKind::GraphMetric).unwrap();
        let cfg = RunConfig {
            epsilon_request: Some(rat(1, 2)),
            ..RunConfig::default()
        };
        let outcome = cmd_solve(&inst, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        outcome.save_artifacts(dir.path(), &inst).unwrap();
        // swap one edge in the serialized output ensemble
        let path = dir.path().join(artifact_names::ENSEMBLE_OUT);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let edges = v["blocks"][0]["edges"].as_array_mut().unwrap();
        let first = edges[0].as_array().unwrap();
        let (a, b) = (first[0].as_u64().unwrap(), first[1].as_u64().unwrap());
        let replacement = (0..7u64)
            .find(|&x| x != a && x != b)
            .map(|x| serde_json::json!([x, b]))
            .unwrap();
        edges[0] = replacement;
        std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
        assert!(cmd_verify(dir.path()).is_err());
    }

    #[test]
    fn batch_empty_is_clean() {
        let stats = cmd_batch(&[], &RunConfig::default());
        assert_eq!(stats.runs, 0);
        assert!(stats.all_passed());
        assert!(stats.max_ratio_lp.is_none());
    }

    #[test]
    fn batch_small_sweep() {
        let items: Vec<BatchItem> = (0..4)
            .map(|seed| BatchItem {
                seed,
                n: 6,
                kind: MetricKind::Euclidean,
            })
            .collect();
        let cfg = RunConfig {
            epsilon_request: Some(rat(1, 2)),
            ..RunConfig::default()
        };
        let stats = cmd_batch(&items, &cfg);
        assert_eq!(stats.runs, 4);
        assert!(stats.all_passed(), "failures: {:?}", stats.failures);
        let (_, max_ratio) = stats.max_ratio_lp.clone().unwrap();
        let guarantee = 2.0 - 3327.0 / 7654.0 + 0.5;
        assert!(max_ratio <= guarantee);
    }

    #[test]
    fn reports_are_byte_identical() {
        let inst = Instance::random(5, 7, MetricKind::RandomClosure).unwrap();
        let cfg = RunConfig {
            epsilon_request: Some(rat(1, 3)),
            ..RunConfig::default()
        };
        let a = cmd_solve(&inst, &cfg).unwrap();
        let b = cmd_solve(&inst, &cfg).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    }
}
