use super::report::{InequalityId, InequalityReport};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::norms::{lebesgue_norm, lorentz_norm, LorentzIndex, NormSpec};
use crate::operators::maximal_function;
use crate::random::{derive_seed, FieldDistribution};
use crate::space::Space;

/// `‖Mf‖_{L^{1,∞}} / ‖f‖_{L¹}`.
pub fn weak_type_ratio(space: &Space, f: &ScalarField) -> Result<f64> {
    let l1 = lebesgue_norm(space, f, 1.0)?;
    if l1 == 0.0 {
        return Err(invalid("weak-type ratio of the zero field"));
    }
    let m = maximal_function(space, f)?;
    Ok(lorentz_norm(space, &m, 1.0, LorentzIndex::Infinite)? / l1)
}

/// Largest `norm(Mf)/norm(f)` over seeded random fields; for `L¹` the weak-type
/// ratio is recorded as well.
pub fn maximal_boundedness(
    space: &Space,
    spec: &NormSpec,
    trials: usize,
    seed: u64,
    distribution: &FieldDistribution,
) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    spec.validate()?;
    let weak = matches!(spec, NormSpec::Lebesgue { p } if *p == 1.0);
    let mut report = InequalityReport::new(InequalityId::MaximalBound, spec.name());
    report.seed = Some(seed);
    report.param("norm", spec);
    report.param("trials", trials);
    report.param("distribution", distribution);
    report.param("ball_family", "point-centered open balls");
    let mut weak_max: f64 = 0.0;
    for t in 0..trials {
        let f = distribution.sample(space, derive_seed(seed, t as u64))?;
        let m = maximal_function(space, &f)?;
        report.lhs.push(spec.norm(space, &m)?);
        report.rhs.push(spec.norm(space, &f)?);
        if weak {
            weak_max = weak_max.max(weak_type_ratio(space, &f)?);
        }
    }
    if weak {
        report.param("weak_type_constant", weak_max);
    }
    report.tally(0.0);
    Ok(report)
}
