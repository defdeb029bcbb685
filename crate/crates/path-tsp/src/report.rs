//! The run report: everything a reviewer needs to re-check a run, with
//! every number carried both as an exact rational string and a float
//! preview. Field order is fixed, so identical runs serialize to
//! identical bytes.

use crate::analysis::{CutAudit, MembershipScope};
use crate::ratio::RatJson;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceSummary {
    pub name: String,
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub integral_costs: bool,
    pub metric_closure_applied: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CutReport {
    /// |U_i|.
    pub size: usize,
    /// x*(C_i).
    pub value: RatJson,
    /// θ_i.
    pub theta: u64,
    pub audit: AuditReport,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AuditReport {
    /// π: fraction of trees crossing evenly.
    pub even_fraction: RatJson,
    pub benefit_avg: RatJson,
    pub required: RatJson,
    pub pass: bool,
    pub pi_bound_ok: bool,
}

impl AuditReport {
    pub fn of(audit: &CutAudit) -> Self {
        AuditReport {
            even_fraction: RatJson::of(&audit.even_fraction),
            benefit_avg: RatJson::of(&audit.benefit_avg),
            required: RatJson::of(&audit.required),
            pass: audit.pass,
            pi_bound_ok: audit.pi_bound_ok,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Certificates {
    /// Independent recount of the structure claims.
    pub structure: bool,
    /// Every narrow cut passed the benefit audit.
    pub benefit: bool,
    /// Scope of the join-polyhedron membership checks.
    pub tjoin_polyhedron: MembershipScope,
    /// The full averaging chain and the headline bound.
    pub bound: bool,
    /// ε = 0 only: the first output tree crosses every narrow cut once.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_tree_single_crosser: Option<bool>,
    /// When the first tree crosses every narrow cut once: (1/2)x* lies in
    /// its join polyhedron.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_lp_in_join_polyhedron: Option<MembershipScope>,
    /// Cuts skipped by the float classification margin.
    pub boundary_cuts: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunStats {
    pub swap_records: u64,
    pub processed_copies: u64,
    pub replayed_copies: u64,
    pub bulk_copies: u64,
    pub num_blocks_final: usize,
    pub leftover_blocks: usize,
    pub candidates: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TourReport {
    pub instance: InstanceSummary,
    pub lp_value: RatJson,
    pub ell: usize,
    pub cuts: Vec<CutReport>,
    pub r: u64,
    pub epsilon: RatJson,
    pub beta: RatJson,
    pub delta: RatJson,
    pub num_blocks_peak: usize,
    pub best_cost: RatJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_cost: Option<RatJson>,
    pub ratio_lp: RatJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_opt: Option<RatJson>,
    /// 2 - β + ε for this run's ε.
    pub guarantee: RatJson,
    pub certificates: Certificates,
    pub best_order: Vec<usize>,
    pub stats: RunStats,
}

impl TourReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn all_certificates_pass(&self) -> bool {
        self.certificates.structure
            && self.certificates.benefit
            && self.certificates.bound
            && self.certificates.first_tree_single_crosser != Some(false)
    }

    /// One-screen human summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "instance {} (n={}, s={}, t={})\n",
            self.instance.name, self.instance.n, self.instance.s, self.instance.t
        ));
        out.push_str(&format!(
            "lp value {} ({:.6})\n",
            self.lp_value.exact, self.lp_value.approx
        ));
        out.push_str(&format!(
            "narrow cuts: {} levels, r = {}, epsilon = {}\n",
            self.ell + 1,
            self.r,
            self.epsilon.exact
        ));
        out.push_str(&format!(
            "best tour {} ({:.6}), ratio vs lp {:.6} (guarantee {:.6})\n",
            self.best_cost.exact, self.best_cost.approx, self.ratio_lp.approx, self.guarantee.approx
        ));
        if let (Some(opt), Some(ratio)) = (&self.opt_cost, &self.ratio_opt) {
            out.push_str(&format!(
                "optimum {} ({:.6}), ratio vs opt {:.6}\n",
                opt.exact, opt.approx, ratio.approx
            ));
        }
        out.push_str(&format!(
            "certificates: structure={} benefit={} polyhedron={:?} bound={}\n",
            self.certificates.structure,
            self.certificates.benefit,
            self.certificates.tjoin_polyhedron,
            self.certificates.bound
        ));
        out
    }

    pub fn cut_margin(&self) -> Option<f64> {
        self.cuts
            .iter()
            .map(|c| c.audit.benefit_avg.approx - c.audit.required.approx)
            .min_by(|a, b| a.partial_cmp(b).expect("finite"))
    }
}
