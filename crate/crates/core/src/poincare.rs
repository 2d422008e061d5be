//! Empirical constant of the weak `(s, q)`-Poincaré inequality on sampled balls.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::operators::verify_upper_gradient;
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareParams {
    pub s_exp: f64,
    pub q_exp: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_sigma() -> f64 {
    2.0
}

impl PoincareParams {
    pub fn new(s_exp: f64, q_exp: f64, sigma: f64) -> Result<PoincareParams> {
        let p = PoincareParams { s_exp, q_exp, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_exp >= 1.0 && self.q_exp > self.s_exp && self.q_exp.is_finite()) {
            return Err(invalid(format!(
                "Poincaré exponents need 1 ≤ s < q, got s = {}, q = {}",
                self.s_exp, self.q_exp
            )));
        }
        if !(self.sigma >= 1.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("dilation σ must be ≥ 1, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareEstimate {
    /// Max of LHS/RHS; `+∞` when some ball has zero RHS but positive LHS.
    pub constant: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub infinite: usize,
}

/// Measures `max (⨍_B |f − f_B|^q)^{1/q} / (r (⨍_{σB} g^s)^{1/s})` over the
/// sampled balls and field pairs.
pub fn estimate_poincare_constant(
    space: &Space,
    params: &PoincareParams,
    fields: &[(ScalarField, ScalarField)],
    ball_sample: &[(usize, f64)],
) -> Result<PoincareEstimate> {
    params.validate()?;
    if ball_sample.is_empty() {
        return Err(invalid("empty ball sample"));
    }
    for &(c, r) in ball_sample {
        if c >= space.len() || !(r > 0.0) {
            return Err(invalid(format!("bad ball ({c}, {r})")));
        }
        if params.sigma * r > space.diameter() {
            return Err(invalid(format!("dilated radius σ·{r} exceeds the diameter")));
        }
    }
    for (f, g) in fields {
        f.check_space(space)?;
        g.check_space(space)?;
        if g.values().iter().any(|&v| v < 0.0) {
            return Err(Error::Precondition("upper gradient has negative values".into()));
        }
        if space.has_adjacency() && !verify_upper_gradient(space, f, g, &[])? {
            return Err(Error::Precondition("g is not an upper gradient of f".into()));
        }
    }
    let (q, s) = (params.q_exp, params.s_exp);
    let mut est = PoincareEstimate {
        constant: 0.0,
        evaluated: 0,
        skipped: 0,
        infinite: 0,
    };
    for (f, g) in fields {
        let (fv, gv) = (f.values(), g.values());
        for &(c, r) in ball_sample {
            let ball = space.ball(c, r)?;
            let mean = ball.members.iter().map(|&i| fv[i] * space.weight(i)).sum::<f64>() / ball.mass;
            let osc = ball
                .members
                .iter()
                .map(|&i| (fv[i] - mean).abs().powf(q) * space.weight(i))
                .sum::<f64>()
                / ball.mass;
            let lhs = osc.powf(1.0 / q);
            let big = space.ball(c, params.sigma * r)?;
            let grad = big.members.iter().map(|&i| gv[i].powf(s) * space.weight(i)).sum::<f64>() / big.mass;
            let rhs = r * grad.powf(1.0 / s);
            if rhs == 0.0 {
                if lhs == 0.0 {
                    est.skipped += 1;
                } else {
                    est.infinite += 1;
                    est.constant = f64::INFINITY;
                }
                continue;
            }
            est.evaluated += 1;
            est.constant = est.constant.max(lhs / rhs);
        }
    }
    Ok(est)
}
