use serde::{Deserialize, Serialize};

use super::report::{CheckContext, InequalityId, InequalityReport};
use crate::ahlfors::theorem1_condition;
use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::kernel::RoughKernelMatrix;
use crate::norms::morrey_norm;
use crate::operators::{maximal_function, maximal_singular, riesz_potential, verify_upper_gradient};
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// `T*f ≤ C R_1(g)`
    Thm1,
    /// `|R_s f| ≤ C (Mf)^{1−qs/ν} ‖f‖_{M^{p,q}}^{qs/ν}`
    Thm2,
    /// `T*f ≤ C (Mg)^{1−q/ν} ‖g‖_{M^{p,q}}^{q/ν}`
    Thm3,
}

impl Theorem {
    pub fn id(self) -> InequalityId {
        match self {
            Theorem::Thm1 => InequalityId::Thm1,
            Theorem::Thm2 => InequalityId::Thm2,
            Theorem::Thm3 => InequalityId::Thm3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseParams {
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default = "default_exponent")]
    pub p: f64,
    #[serde(default = "default_exponent")]
    pub q: f64,
}

fn default_exponent() -> f64 {
    1.5
}

impl Default for PointwiseParams {
    fn default() -> Self {
        PointwiseParams {
            s: None,
            p: 1.5,
            q: 1.5,
        }
    }
}

/// Checks the exponent constraints of a theorem against the fitted `ν`.
pub fn validate_pointwise(which: Theorem, params: &PointwiseParams, nu: f64) -> Result<()> {
    let morrey = |p: f64, q: f64| {
        if p > 1.0 && p <= q && q.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("Morrey exponents need 1 < p ≤ q < ∞, got p = {p}, q = {q}")))
        }
    };
    match which {
        Theorem::Thm1 => Ok(()),
        Theorem::Thm2 => {
            morrey(params.p, params.q)?;
            let s = params.s.ok_or_else(|| invalid("thm2 needs the Riesz order s"))?;
            if !(s > 0.0 && s < nu / params.q) {
                return Err(invalid(format!(
                    "thm2 needs 0 < s < ν/q, got s = {s}, ν/q = {}",
                    nu / params.q
                )));
            }
            Ok(())
        }
        Theorem::Thm3 => {
            morrey(params.p, params.q)?;
            if !(params.q < nu) {
                return Err(invalid(format!("thm3 needs q/ν < 1, got q = {}, ν = {nu}", params.q)));
            }
            Ok(())
        }
    }
}

/// Fails unless `g ≥ 0` satisfies the edge rule for `f`.
pub fn require_upper_gradient(space: &Space, f: &ScalarField, g: &ScalarField) -> Result<()> {
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("upper gradient has negative values".into()));
    }
    if !verify_upper_gradient(space, f, g, &[])? {
        return Err(Error::Precondition("g is not an upper gradient of f".into()));
    }
    Ok(())
}

/// `(Mh)^{1−a} ‖h‖^a` at every point.
fn hedberg_rhs(space: &Space, h: &ScalarField, p: f64, q: f64, a: f64) -> Result<(Vec<f64>, f64)> {
    let m = maximal_function(space, h)?;
    let norm = morrey_norm(space, h, p, q)?;
    let scale = norm.powf(a);
    Ok((m.values().iter().map(|v| v.powf(1.0 - a) * scale).collect(), norm))
}

pub fn check_pointwise_theorem(
    ctx: &CheckContext<'_>,
    kernel: Option<&RoughKernelMatrix>,
    f: &ScalarField,
    g: Option<&ScalarField>,
    which: Theorem,
    params: &PointwiseParams,
) -> Result<InequalityReport> {
    let space = ctx.space;
    let nu = ctx.nu();
    f.check_space(space)?;
    validate_pointwise(which, params, nu)?;
    let mut report = InequalityReport::new(which.id(), which.id().as_str());
    ctx.stamp(&mut report);
    report.param("s", params.s);
    report.param("p", params.p);
    report.param("q", params.q);
    report.point_ids = (0..space.len()).collect();
    let needs = |what: &str| Error::Precondition(format!("{} needs {what}", which.id().as_str()));
    let zero_tol = match which {
        Theorem::Thm2 => {
            let s = params.s.unwrap_or(1.0);
            let a = params.q * s / nu;
            report.param("exponent", a);
            report.lhs = riesz_potential(space, f, s)?.values().iter().map(|v| v.abs()).collect();
            let (rhs, norm) = hedberg_rhs(space, f, params.p, params.q, a)?;
            report.param("morrey_norm", norm);
            report.rhs = rhs;
            0.0
        }
        Theorem::Thm1 | Theorem::Thm3 => {
            let kernel = kernel.ok_or_else(|| needs("a kernel"))?;
            let g = g.ok_or_else(|| needs("an upper gradient"))?;
            kernel.check_space(space)?;
            g.check_space(space)?;
            require_upper_gradient(space, f, g)?;
            ctx.stamp_kernel(&mut report, kernel);
            report.exploratory = !theorem1_condition(ctx.certificate).holds;
            report.lhs = maximal_singular(space, kernel, f)?.into_values();
            report.rhs = if which == Theorem::Thm1 {
                riesz_potential(space, g, 1.0)?.into_values()
            } else {
                let a = params.q / nu;
                report.param("exponent", a);
                let (rhs, norm) = hedberg_rhs(space, g, params.p, params.q, a)?;
                report.param("morrey_norm", norm);
                rhs
            };
            ctx.singular_zero_tol(kernel, f.max_abs())
        }
    };
    report.param("zero_tolerance", zero_tol);
    report.tally(zero_tol);
    Ok(report)
}

/// `constant(thm3) ≤ constant(thm1)·constant(thm2 on g)` within `1e-9` relative.
pub fn composition_holds(thm1: &InequalityReport, thm2_on_g: &InequalityReport, thm3: &InequalityReport) -> bool {
    thm3.empirical_constant <= thm1.empirical_constant * thm2_on_g.empirical_constant * (1.0 + 1e-9)
}
