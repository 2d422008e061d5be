//! Both sides of each inequality, evaluated pointwise or in norm, with the
//! measured constants collected into [`InequalityReport`]s.

pub mod functional;
pub mod hedberg;
pub mod maximal;
pub mod pointwise;
pub mod report;
pub mod sharpness;

pub use functional::{check_functional, plan_functional, q_sobolev, FunctionalCase, FunctionalParams, FunctionalPlan};
pub use hedberg::{check_hedberg_split, default_k_grid, HedbergParams, HedbergPoint, HEDBERG_FACTOR};
pub use maximal::{maximal_boundedness, weak_type_ratio};
pub use pointwise::{
    check_pointwise_theorem, composition_holds, require_upper_gradient, validate_pointwise, PointwiseParams, Theorem,
};
pub use report::{CheckContext, InequalityId, InequalityReport, SCHEMA_VERSION, ZERO_REL_TOL};
pub use sharpness::{sharpness_search, Move, SharpnessConfig, SharpnessResult, Thm2Evaluator, TraceStep};

use crate::poincare::{PoincareEstimate, PoincareParams};

/// Wraps a measured Poincaré constant as a scalar report; balls with zero
/// right side and positive left side count as violations.
pub fn poincare_report(params: &PoincareParams, estimate: &PoincareEstimate, seed: Option<u64>) -> InequalityReport {
    let mut report = InequalityReport::new(InequalityId::Poincare, "poincare");
    report.seed = seed;
    report.param("s_exp", params.s_exp);
    report.param("q_exp", params.q_exp);
    report.param("sigma", params.sigma);
    report.param("evaluated", estimate.evaluated);
    report.empirical_constant = estimate.constant;
    report.skipped_points = estimate.skipped;
    report.violations = estimate.infinite;
    report.passed = estimate.infinite == 0 && estimate.constant.is_finite();
    report
}
