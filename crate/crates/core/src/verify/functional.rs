use serde::{Deserialize, Serialize};
use serde_json::json;

use super::pointwise::require_upper_gradient;
use super::report::{CheckContext, InequalityId, InequalityReport};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::kernel::RoughKernelMatrix;
use crate::norms::{
    delta2_diagnostic, exponent_range, lebesgue_norm, log_holder_diagnostics, morrey_norm, nabla2_search,
    LorentzIndex, NormSpec, YoungFunction,
};
use crate::operators::maximal_singular;

/// Which norm is applied to both sides of the pointwise bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionalCase {
    Lebesgue { r: f64 },
    /// `r = qν/(ν−q)`, `p = q`: `‖T*f‖_{L^r} ≤ C‖g‖_{L^q}`.
    SobolevLike,
    Lorentz { r: f64, m: LorentzIndex },
    /// `(1−q/ν)r = 1`; `r` defaults to `1/(1−q/ν)`.
    LorentzEndpoint {
        #[serde(default)]
        r: Option<f64>,
    },
    Morrey { p1: f64, q1: f64 },
    Orlicz { phi: YoungFunction },
    Varexp { exponent: Vec<f64> },
}

impl FunctionalCase {
    pub fn id(&self) -> InequalityId {
        match self {
            FunctionalCase::SobolevLike => InequalityId::SobolevLike,
            FunctionalCase::LorentzEndpoint { .. } => InequalityId::LorentzEndpoint,
            FunctionalCase::Morrey { .. } => InequalityId::MorreyFunctional,
            _ => InequalityId::GenericFunctional,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FunctionalCase::Lebesgue { r } => format!("lebesgue(r={r})"),
            FunctionalCase::SobolevLike => "sobolev_like".into(),
            FunctionalCase::Lorentz { r, m } => format!("lorentz(r={r},m={m})"),
            FunctionalCase::LorentzEndpoint { .. } => "lorentz_endpoint".into(),
            FunctionalCase::Morrey { p1, q1 } => format!("morrey(p1={p1},q1={q1})"),
            FunctionalCase::Orlicz { .. } => "orlicz".into(),
            FunctionalCase::Varexp { .. } => "varexp".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub p: f64,
    pub q: f64,
}

/// Norms for both sides: `lhs` of `T*f`, `rescaled` of `g` raised to `1 − q/ν`,
/// and `morrey` of `g` raised to `q/ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalPlan {
    pub lhs: NormSpec,
    pub rescaled: NormSpec,
    pub morrey: Option<(f64, f64)>,
    pub rho: f64,
}

fn in_open(v: f64, what: &str) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must lie in (1, ∞), got {v}")))
    }
}

/// Resolves exponents and checks the constraints of the chosen case.
pub fn plan_functional(case: &FunctionalCase, params: &FunctionalParams, nu: f64) -> Result<FunctionalPlan> {
    let FunctionalParams { p, q } = *params;
    if !(q > 1.0 && q < nu) {
        return Err(invalid(format!("functional bounds need 1 < q < ν, got q = {q}, ν = {nu}")));
    }
    let rho = 1.0 - q / nu;
    let with_morrey = || -> Result<Option<(f64, f64)>> {
        if p > 1.0 && p <= q {
            Ok(Some((p, q)))
        } else {
            Err(invalid(format!("Morrey exponents need 1 < p ≤ q < ∞, got p = {p}, q = {q}")))
        }
    };
    let plan = |lhs: NormSpec, rescaled: NormSpec, morrey| FunctionalPlan { lhs, rescaled, morrey, rho };
    match case {
        FunctionalCase::Lebesgue { r } => {
            in_open(*r, "r")?;
            in_open(rho * r, "(1−q/ν)·r")?;
            let e = NormSpec::Lebesgue { p: *r };
            Ok(plan(e.clone(), e.rescaled(rho), with_morrey()?))
        }
        FunctionalCase::SobolevLike => {
            let r = q * nu / (nu - q);
            Ok(plan(NormSpec::Lebesgue { p: r }, NormSpec::Lebesgue { p: q }, None))
        }
        FunctionalCase::Lorentz { r, m } => {
            in_open(rho * r, "(1−q/ν)·r")?;
            if let LorentzIndex::Finite(m) = m {
                in_open(rho * m, "(1−q/ν)·m")?;
            }
            let e = NormSpec::Lorentz { r: *r, m: *m };
            Ok(plan(e.clone(), e.rescaled(rho), with_morrey()?))
        }
        FunctionalCase::LorentzEndpoint { r } => {
            let r_end = 1.0 / rho;
            if let Some(r) = r {
                if ((rho * r) - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("endpoint needs (1−q/ν)·r = 1, got {}", rho * r)));
                }
            }
            Ok(plan(
                NormSpec::Lorentz { r: r.unwrap_or(r_end), m: LorentzIndex::Infinite },
                NormSpec::Lebesgue { p: 1.0 },
                with_morrey()?,
            ))
        }
        FunctionalCase::Morrey { p1, q1 } => {
            if !(*p1 > 1.0 && p1 <= q1 && q1.is_finite()) {
                return Err(invalid(format!("need 1 < p1 ≤ q1 < ∞, got p1 = {p1}, q1 = {q1}")));
            }
            in_open(rho * p1, "(1−q/ν)·p1")?;
            let e = NormSpec::Morrey { p: *p1, q: *q1 };
            Ok(plan(e.clone(), e.rescaled(rho), with_morrey()?))
        }
        FunctionalCase::Orlicz { phi } => {
            phi.validate()?;
            let scaled = phi.rescaled(rho);
            scaled
                .validate()
                .map_err(|e| invalid(format!("Φ_(1−q/ν) must be a Young function: {e}")))?;
            if !delta2_diagnostic(&scaled).is_finite() || nabla2_search(&scaled).1 > 1.0 {
                return Err(invalid("Φ_(1−q/ν) must satisfy the Δ₂ and ∇₂ conditions"));
            }
            Ok(plan(
                NormSpec::Orlicz { phi: *phi },
                NormSpec::Orlicz { phi: scaled },
                with_morrey()?,
            ))
        }
        FunctionalCase::Varexp { exponent } => {
            let (lo, hi) = exponent_range(exponent)?;
            in_open(rho * lo, "(1−q/ν)·r⁻")?;
            debug_assert!(hi.is_finite());
            let e = NormSpec::Varexp { exponent: exponent.clone() };
            Ok(plan(e.clone(), e.rescaled(rho), with_morrey()?))
        }
    }
}

/// Applies a norm to both sides of the pointwise bound and records the ratio.
pub fn check_functional(
    ctx: &CheckContext<'_>,
    kernel: &RoughKernelMatrix,
    f: &ScalarField,
    g: &ScalarField,
    case: &FunctionalCase,
    params: &FunctionalParams,
) -> Result<InequalityReport> {
    let space = ctx.space;
    let nu = ctx.nu();
    f.check_space(space)?;
    g.check_space(space)?;
    kernel.check_space(space)?;
    let plan = plan_functional(case, params, nu)?;
    require_upper_gradient(space, f, g)?;

    let mut report = InequalityReport::new(case.id(), case.label());
    ctx.stamp(&mut report);
    ctx.stamp_kernel(&mut report, kernel);
    report.param("case", case);
    report.param("p", params.p);
    report.param("q", params.q);
    report.param("rho", plan.rho);
    report.param("lhs_norm", plan.lhs.name());
    report.param("rhs_norm", plan.rescaled.name());

    let zero_tol = ctx.singular_zero_tol(kernel, f.max_abs());
    let t = maximal_singular(space, kernel, f)?.map(|v| if v <= zero_tol { 0.0 } else { v });
    let lhs = plan.lhs.norm(space, &t)?;
    let rhs = match case {
        FunctionalCase::SobolevLike => {
            report.param("r", q_sobolev(params.q, nu));
            lebesgue_norm(space, g, params.q)?
        }
        _ => {
            let (mp, mq) = plan.morrey.expect("non-Sobolev cases carry Morrey exponents");
            let a = plan.rescaled.norm(space, g)?.powf(plan.rho);
            let b = morrey_norm(space, g, mp, mq)?.powf(params.q / nu);
            report.param("rescaled_norm_power", a);
            report.param("morrey_norm_power", b);
            a * b
        }
    };
    match case {
        FunctionalCase::Orlicz { phi } => {
            let scaled = phi.rescaled(plan.rho);
            let (c, nabla) = nabla2_search(&scaled);
            report.param(
                "young_diagnostics",
                json!({ "delta2": delta2_diagnostic(&scaled), "nabla2": nabla, "nabla2_c": c }),
            );
        }
        FunctionalCase::Varexp { exponent } => {
            let inv = ScalarField::new(space, exponent.iter().map(|r| 1.0 / (plan.rho * r)).collect())?;
            report.param("log_holder", log_holder_diagnostics(space, &inv, 0)?);
        }
        _ => {}
    }
    report.lhs = vec![lhs];
    report.rhs = vec![rhs];
    report.tally(0.0);
    Ok(report)
}

/// `qν/(ν−q)`.
pub fn q_sobolev(q: f64, nu: f64) -> f64 {
    q * nu / (nu - q)
}
