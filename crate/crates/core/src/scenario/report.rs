use serde::{Deserialize, Serialize};

use crate::bandit::BanditRetargetReport;
use crate::decisions::Estimate;
use crate::error::{Error, Result};
use crate::mdp::AvgOptEstimate;
use crate::outcomes::CopyCertificate;
use crate::perm::{ParameterVector, Permutation};
use crate::tendency::{MultiRetargetReport, OrbitTendencyReport};

pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Refuted,
}

impl Verdict {
    pub fn from_bool(holds: bool) -> Self {
        if holds {
            Verdict::Holds
        } else {
            Verdict::Refuted
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTotals {
    pub b_gt_a: u64,
    pub a_gt_b: u64,
    pub tie: u64,
}

impl CountTotals {
    pub fn add(&mut self, r: &OrbitTendencyReport) {
        self.b_gt_a += r.count_b_gt_a;
        self.a_gt_b += r.count_a_gt_b;
        self.tie += r.count_tie;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub permutations: Vec<Permutation>,
    pub orbits_checked: usize,
    /// Orbits where some retargeting condition failed.
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<(ParameterVector, MultiRetargetReport)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule: String,
    pub orbits_checked: usize,
    pub violations: usize,
    pub holds: bool,
    pub totals: CountTotals,
    /// Reports for the configured parameters, in order.
    pub fixtures: Vec<OrbitTendencyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<OrbitTendencyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResults {
    pub dimension: usize,
    pub n: u64,
    pub domain: String,
    pub a: Vec<ParameterVector>,
    pub b: Vec<ParameterVector>,
    pub c: Vec<ParameterVector>,
    pub rules: Vec<RuleResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpResults {
    pub start: String,
    pub rsds: Vec<ParameterVector>,
    pub one_cycle_states: Vec<String>,
    pub d_prime: Vec<String>,
    pub d: Vec<String>,
    pub n: u64,
    /// `n` copies of `D′` inside `D`, when they exist.
    pub copies: Option<CopyCertificate>,
    pub orbits_checked: usize,
    pub orbit_violations: usize,
    pub totals: CountTotals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<OrbitTendencyReport>,
    pub avg_opt: AvgOptEstimate,
    /// `1/(n+1)`, the largest share `D′` can take when `D` has `n` copies.
    pub avg_opt_bound: f64,
    pub avg_opt_within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlCheck {
    pub utilities: ParameterVector,
    pub expected: f64,
    pub frequencies: Vec<Estimate>,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditResults {
    pub utilities: ParameterVector,
    pub epsilon: f64,
    pub trials: u32,
    pub runs: usize,
    pub optimal_arm: Estimate,
    pub lower_bound: f64,
    pub meets_lower_bound: bool,
    pub retarget: BanditRetargetReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioResults {
    Orbit(OrbitResults),
    Mdp(MdpResults),
    Bandit(BanditResults),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub results: ScenarioResults,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Config {
                field: "schema_version".into(),
                message: format!("unsupported version {}", report.schema_version),
            });
        }
        Ok(report)
    }
}
