use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pointwise::{check_pointwise_theorem, validate_pointwise, PointwiseParams, Theorem};
use super::report::CheckContext;
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::kernel::RoughKernelMatrix;
use crate::norms::morrey_norm;
use crate::operators::{graph_upper_gradient, maximal_function};
use crate::random::FieldDistribution;
use crate::space::Space;

/// The inequality whose constant is pushed up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub which: Theorem,
    pub params: PointwiseParams,
    /// Distribution of the starting field; values are made nonnegative.
    #[serde(default)]
    pub start: FieldDistribution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Move {
    Double,
    Halve,
    FlipSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub point: usize,
    pub action: Move,
    pub ratio: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessResult {
    pub initial_ratio: f64,
    pub best_ratio: f64,
    pub best_field: Vec<f64>,
    pub accepted: usize,
    pub trace: Vec<TraceStep>,
}

/// Evaluates the thm2 constant repeatedly on one space, with the Riesz
/// weights `d^s/μ(B(x,d))·μ(y)` precomputed.
pub struct Thm2Evaluator<'a> {
    space: &'a Space,
    weights: Vec<f64>,
    p: f64,
    q: f64,
    exponent: f64,
}

impl<'a> Thm2Evaluator<'a> {
    pub fn new(space: &'a Space, s: f64, p: f64, q: f64, nu: f64) -> Result<Thm2Evaluator<'a>> {
        validate_pointwise(Theorem::Thm2, &PointwiseParams { s: Some(s), p, q }, nu)?;
        let n = space.len();
        let mut weights = vec![0.0; n * n];
        for x in 0..n {
            let sh = space.shells(x);
            for k in 1..sh.len() {
                let m = sh.mass_before(k);
                for &y in sh.members(k) {
                    let y = y as usize;
                    weights[x * n + y] = space.dist(x, y).powf(s) / m * space.weight(y);
                }
            }
        }
        Ok(Thm2Evaluator {
            space,
            weights,
            p,
            q,
            exponent: q * s / nu,
        })
    }

    /// Empirical constant of thm2 for `f` (0 for `f ≡ 0`).
    pub fn ratio(&self, f: &ScalarField) -> Result<f64> {
        let n = self.space.len();
        let norm = morrey_norm(self.space, f, self.p, self.q)?;
        if norm == 0.0 {
            return Ok(0.0);
        }
        let m = maximal_function(self.space, f)?;
        let scale = norm.powf(self.exponent);
        let v = f.values();
        let mut best: f64 = 0.0;
        for x in 0..n {
            let row = &self.weights[x * n..(x + 1) * n];
            let r: f64 = row.iter().zip(v).map(|(w, f)| w * f).sum();
            let rhs = m.values()[x].powf(1.0 - self.exponent) * scale;
            if rhs > 0.0 {
                best = best.max(r.abs() / rhs);
            }
        }
        Ok(best)
    }
}

enum Objective<'a> {
    Thm2(Thm2Evaluator<'a>),
    Singular {
        ctx: CheckContext<'a>,
        kernel: &'a RoughKernelMatrix,
        which: Theorem,
        params: PointwiseParams,
    },
}

impl Objective<'_> {
    fn eval(&self, f: &ScalarField) -> Result<f64> {
        match self {
            Objective::Thm2(e) => e.ratio(f),
            Objective::Singular { ctx, kernel, which, params } => {
                let g = graph_upper_gradient(ctx.space, f)?.g;
                let r = check_pointwise_theorem(ctx, Some(kernel), f, Some(&g), *which, params)?;
                Ok(r.empirical_constant)
            }
        }
    }
}

/// Randomized hill climb on the empirical constant. Each step doubles, halves
/// or flips the sign of one value and is kept only if the constant grows.
pub fn sharpness_search(
    ctx: &CheckContext<'_>,
    kernel: Option<&RoughKernelMatrix>,
    config: &SharpnessConfig,
    iterations: usize,
    seed: u64,
) -> Result<SharpnessResult> {
    let space = ctx.space;
    let objective = match config.which {
        Theorem::Thm2 => {
            let s = config.params.s.ok_or_else(|| invalid("thm2 needs the Riesz order s"))?;
            Objective::Thm2(Thm2Evaluator::new(space, s, config.params.p, config.params.q, ctx.nu())?)
        }
        which => Objective::Singular {
            ctx: *ctx,
            kernel: kernel.ok_or_else(|| invalid("singular-integral targets need a kernel"))?,
            which,
            params: config.params,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: u64 = rng.random();
    let mut current = config.start.sample(space, start)?.abs();
    let initial = objective.eval(&current)?;
    let mut best = initial;
    let mut trace = Vec::with_capacity(iterations);
    let mut accepted = 0;
    for iteration in 0..iterations {
        let point = rng.random_range(0..space.len());
        let action = match rng.random_range(0..3u8) {
            0 => Move::Double,
            1 => Move::Halve,
            _ => Move::FlipSign,
        };
        let mut values = current.values().to_vec();
        values[point] = match action {
            Move::Double => 2.0 * values[point],
            Move::Halve => 0.5 * values[point],
            Move::FlipSign => -values[point],
        };
        let candidate = ScalarField::new(space, values)?;
        let ratio = objective.eval(&candidate)?;
        let ok = ratio > best;
        if ok {
            best = ratio;
            current = candidate;
            accepted += 1;
        }
        trace.push(TraceStep {
            iteration,
            point,
            action,
            ratio,
            accepted: ok,
        });
    }
    Ok(SharpnessResult {
        initial_ratio: initial,
        best_ratio: best,
        best_field: current.into_values(),
        accepted,
        trace,
    })
}
