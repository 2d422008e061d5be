use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ahlfors::{theorem1_condition, AhlforsCertificate};
use crate::kernel::RoughKernelMatrix;
use crate::poincare::PoincareEstimate;
use crate::space::Space;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative threshold below which a left-hand side counts as zero.
pub const ZERO_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Thm1,
    Thm2,
    Thm3,
    HedbergSplit,
    SobolevLike,
    LorentzEndpoint,
    MorreyFunctional,
    GenericFunctional,
    MaximalBound,
    Poincare,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::Thm1 => "thm1",
            InequalityId::Thm2 => "thm2",
            InequalityId::Thm3 => "thm3",
            InequalityId::HedbergSplit => "hedberg_split",
            InequalityId::SobolevLike => "sobolev_like",
            InequalityId::LorentzEndpoint => "lorentz_endpoint",
            InequalityId::MorreyFunctional => "morrey_functional",
            InequalityId::GenericFunctional => "generic_functional",
            InequalityId::MaximalBound => "maximal_bound",
            InequalityId::Poincare => "poincare",
        }
    }
}

/// Both sides of one inequality on one input, with the measured constant.
///
/// `point_ids[i]` labels `lhs[i]`/`rhs[i]`; scalar (norm-level) reports leave
/// `point_ids` empty and carry one entry per side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub inequality_id: InequalityId,
    pub label: String,
    pub passed: bool,
    pub exploratory: bool,
    pub empirical_constant: f64,
    pub threshold: Option<f64>,
    pub skipped_points: usize,
    pub violations: usize,
    pub violation_points: Vec<usize>,
    pub seed: Option<u64>,
    pub params: Map<String, Value>,
    pub notes: Vec<String>,
    pub point_ids: Vec<usize>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl InequalityReport {
    pub(crate) fn new(id: InequalityId, label: impl Into<String>) -> InequalityReport {
        InequalityReport {
            schema_version: SCHEMA_VERSION,
            inequality_id: id,
            label: label.into(),
            passed: true,
            exploratory: false,
            empirical_constant: 0.0,
            threshold: None,
            skipped_points: 0,
            violations: 0,
            violation_points: Vec::new(),
            seed: None,
            params: Map::new(),
            notes: Vec::new(),
            point_ids: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Fills the tallies from `lhs`/`rhs`: pairs with `rhs = 0` and
    /// `lhs ≤ zero_tol` are skipped, `rhs = 0 < lhs` is a violation.
    pub(crate) fn tally(&mut self, zero_tol: f64) {
        let mut constant: f64 = 0.0;
        self.skipped_points = 0;
        self.violations = 0;
        self.violation_points.clear();
        for (i, (&l, &r)) in self.lhs.iter().zip(&self.rhs).enumerate() {
            if r == 0.0 {
                if l <= zero_tol {
                    self.skipped_points += 1;
                } else {
                    self.violations += 1;
                    self.violation_points.push(self.point_ids.get(i).copied().unwrap_or(i));
                }
            } else {
                let ratio = if l <= zero_tol { 0.0 } else { l / r };
                constant = constant.max(ratio);
            }
        }
        self.empirical_constant = constant;
        self.refresh_passed();
    }

    pub(crate) fn refresh_passed(&mut self) {
        let within = self.threshold.is_none_or(|t| self.empirical_constant <= t);
        self.passed = self.violations == 0 && within && self.empirical_constant.is_finite();
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn ratio(&self, i: usize) -> Option<f64> {
        let (l, r) = (self.lhs[i], self.rhs[i]);
        (r != 0.0).then(|| l / r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<InequalityReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Per-point table `point_id,lhs,rhs,ratio`; ratios are empty where the
    /// right-hand side vanishes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point_id,lhs,rhs,ratio\n");
        for i in 0..self.lhs.len() {
            let id = self.point_ids.get(i).map(|p| p.to_string()).unwrap_or_default();
            let ratio = self.ratio(i).map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{id},{},{},{ratio}", self.lhs[i], self.rhs[i]);
        }
        out
    }

    /// One line: label, constant, window, condition status, tallies.
    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{} [{}]: constant {:.6e}, skipped {}, violations {}",
            self.inequality_id.as_str(),
            self.label,
            self.empirical_constant,
            self.skipped_points,
            self.violations
        );
        if let Some(cert) = self.params.get("certificate") {
            if let (Some(lo), Some(hi)) = (cert.get("r_min"), cert.get("r_max")) {
                let _ = write!(line, ", window [{lo}, {hi}]");
            }
        }
        if let Some(cond) = self.params.get("condition") {
            if let Some(v) = cond.get("value") {
                let _ = write!(line, ", condition value {v}");
            }
        }
        if self.exploratory {
            line.push_str(", exploratory (condition 2^{1-ν}c2/c1 ≥ 1)");
        }
        line.push_str(if self.passed { ", pass" } else { ", FAIL" });
        line
    }
}

/// Read-only inputs shared by every check on one space.
#[derive(Clone, Copy, Debug)]
pub struct CheckContext<'a> {
    pub space: &'a Space,
    pub certificate: &'a AhlforsCertificate,
    /// Multiplies every zero threshold.
    pub tolerance_scale: f64,
    pub seed: Option<u64>,
    pub poincare: Option<&'a PoincareEstimate>,
}

impl<'a> CheckContext<'a> {
    pub fn new(space: &'a Space, certificate: &'a AhlforsCertificate) -> CheckContext<'a> {
        CheckContext {
            space,
            certificate,
            tolerance_scale: 1.0,
            seed: None,
            poincare: None,
        }
    }

    pub fn nu(&self) -> f64 {
        self.certificate.nu_hat
    }

    /// Zero threshold for left sides built from `T*` of a field with sup norm `f_max`.
    pub fn singular_zero_tol(&self, kernel: &RoughKernelMatrix, f_max: f64) -> f64 {
        ZERO_REL_TOL * self.tolerance_scale * kernel.scale(self.space) * f_max
    }

    pub(crate) fn stamp(&self, report: &mut InequalityReport) {
        let c = self.certificate;
        let cond = theorem1_condition(c);
        report.seed = self.seed;
        report.param(
            "certificate",
            json!({
                "nu_hat": c.nu_hat,
                "c1_hat": c.c1_hat,
                "c2_hat": c.c2_hat,
                "r_min": c.r_min,
                "r_max": c.r_max,
                "sample_count": c.sample_count,
            }),
        );
        report.param("condition", json!({ "holds": cond.holds, "value": cond.value }));
        report.param("tolerance_scale", self.tolerance_scale);
        report.param("ball_family", "point-centered open balls");
        if let Some(p) = self.poincare {
            report.param("poincare", p);
        }
        report
            .notes
            .push("atomic discretization of a nonatomic measure".into());
    }

    pub(crate) fn stamp_kernel(&self, report: &mut InequalityReport, kernel: &RoughKernelMatrix) {
        report.param(
            "kernel",
            json!({
                "pattern": kernel.pattern.name(),
                "seed": kernel.pattern.seed(),
                "nu": kernel.nu_used,
                "projected": kernel.projected,
                "size_constant": kernel.size_constant,
                "null_residual": kernel.shell_null_residual,
            }),
        );
        report
            .notes
            .push("upper gradient checked along edge paths only".into());
    }
}
