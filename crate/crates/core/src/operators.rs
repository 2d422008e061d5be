//! Operators on fields: integration, the centered-ball maximal function, the
//! Riesz-type potential, truncated and maximal rough singular integrals, and
//! discrete upper gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::kernel::RoughKernelMatrix;
use crate::space::Space;
use crate::sum::pairwise_sum_by;

/// Slack allowed in the edge and path rules of an upper gradient.
pub const UPPER_GRADIENT_TOL: f64 = 1e-12;

/// `∫_X f dμ`, summed pairwise in index order.
pub fn integrate(space: &Space, f: &ScalarField) -> Result<f64> {
    f.check_space(space)?;
    let v = f.values();
    Ok(pairwise_sum_by(v.len(), &|i| v[i] * space.weight(i)))
}

/// `f_E`, the μ-average of `f` over the point set `members`.
pub fn average_over(space: &Space, f: &ScalarField, members: &[usize]) -> Result<f64> {
    f.check_space(space)?;
    let mass: f64 = members.iter().map(|&i| space.weight(i)).sum();
    if !(mass > 0.0) {
        return Err(invalid("average over an empty set"));
    }
    let s: f64 = members.iter().map(|&i| f.values()[i] * space.weight(i)).sum();
    Ok(s / mass)
}

/// `M f(x) = sup_{B ∋ x} (1/μ(B)) ∫_B |f| dμ` over every realizable
/// point-centered open ball.
pub fn maximal_function(space: &Space, f: &ScalarField) -> Result<ScalarField> {
    f.check_space(space)?;
    let n = space.len();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let out = (0..n)
        .into_par_iter()
        .fold(
            || vec![0.0f64; n],
            |mut acc, c| {
                let sh = space.shells(c);
                let order = sh.order();
                let m = sh.len();
                // average over shells 0..=k, then the best average among balls ⊇ shell k
                let mut avg = Vec::with_capacity(m);
                let mut integral = 0.0;
                for k in 0..m {
                    for &p in sh.members(k) {
                        integral += abs[p as usize] * space.weight(p as usize);
                    }
                    avg.push(integral / sh.mass_through(k));
                }
                for k in (0..m.saturating_sub(1)).rev() {
                    avg[k] = avg[k].max(avg[k + 1]);
                }
                for k in 0..m {
                    for &p in &order[sh.range(k)] {
                        let slot = &mut acc[p as usize];
                        *slot = slot.max(avg[k]);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    ScalarField::new(space, out)
}

/// How `μ(B(x, d(x,y)))` is evaluated in the Riesz-type potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallMassMode {
    /// Measured mass of the open ball on the space.
    #[default]
    Measured,
    /// `v_n·r^n`, the Lebesgue volume of a Euclidean `n`-ball.
    Analytic,
}

/// Volume of the Euclidean unit ball in dimensions 1 to 3.
pub fn unit_ball_volume(dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(2.0),
        2 => Ok(std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI / 3.0),
        _ => Err(invalid(format!("no unit-ball volume for dimension {dim}"))),
    }
}

/// `R_{s,μ} f(x) = Σ_{y≠x} d(x,y)^s / μ(B(x, d(x,y))) · f(y) μ(y)`.
pub fn riesz_potential(space: &Space, f: &ScalarField, s: f64) -> Result<ScalarField> {
    riesz_potential_with(space, f, s, BallMassMode::Measured)
}

pub fn riesz_potential_with(
    space: &Space,
    f: &ScalarField,
    s: f64,
    mode: BallMassMode,
) -> Result<ScalarField> {
    f.check_space(space)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(invalid(format!("Riesz order must be positive, got {s}")));
    }
    let analytic = match mode {
        BallMassMode::Measured => None,
        BallMassMode::Analytic => {
            let dim = space
                .dim()
                .ok_or_else(|| invalid("analytic ball mode needs a Euclidean space with coordinates"))?;
            Some((dim as i32, unit_ball_volume(dim)?))
        }
    };
    let v = f.values();
    let out: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let sh = space.shells(x);
            let mut acc = 0.0;
            for k in 1..sh.len() {
                let mass_before = sh.mass_before(k);
                for &y in sh.members(k) {
                    let y = y as usize;
                    let d = space.dist(x, y);
                    let mass = match analytic {
                        None => mass_before,
                        Some((dim, vn)) => vn * d.powi(dim),
                    };
                    acc += d.powf(s) / mass * v[y] * space.weight(y);
                }
            }
            acc
        })
        .collect();
    ScalarField::new(space, out)
}

/// `T^ε f(x) = Σ_{d(x,y) > ε} K(x,y) f(y) μ(y)`.
pub fn truncated_singular(
    space: &Space,
    kernel: &RoughKernelMatrix,
    f: &ScalarField,
    eps: f64,
) -> Result<ScalarField> {
    f.check_space(space)?;
    kernel.check_space(space)?;
    if !(eps > 0.0) {
        return Err(invalid(format!("truncation radius must be positive, got {eps}")));
    }
    let v = f.values();
    let out: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let row = kernel.row(x);
            (0..space.len())
                .filter(|&y| y != x && space.dist(x, y) > eps)
                .map(|y| row[y] * v[y] * space.weight(y))
                .sum()
        })
        .collect();
    ScalarField::new(space, out)
}

/// Every truncation radius that yields a distinct `T^ε f(x)`: one value below
/// the nearest neighbour, then the midpoints between consecutive shells.
pub fn truncation_candidates(space: &Space, x: usize) -> Vec<f64> {
    let sh = space.shells(x);
    if sh.len() < 2 {
        return Vec::new();
    }
    let mut out = vec![0.5 * sh.radius(1)];
    out.extend((1..sh.len() - 1).map(|k| sh.midpoint_radius(k)));
    out
}

/// `T* f(x) = sup_ε |T^ε f(x)|`, exact over the candidate truncations.
pub fn maximal_singular(
    space: &Space,
    kernel: &RoughKernelMatrix,
    f: &ScalarField,
) -> Result<ScalarField> {
    f.check_space(space)?;
    kernel.check_space(space)?;
    let v = f.values();
    let out: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let sh = space.shells(x);
            let row = kernel.row(x);
            // outer shells first: the running sum is T^ε for ε just inside shell k
            let mut tail = 0.0;
            let mut best: f64 = 0.0;
            for k in (1..sh.len()).rev() {
                for &y in sh.members(k) {
                    let y = y as usize;
                    tail += row[y] * v[y] * space.weight(y);
                }
                best = best.max(tail.abs());
            }
            best
        })
        .collect();
    ScalarField::new(space, out)
}

/// Discrete upper gradient together with the points that had no neighbours.
#[derive(Clone, Debug)]
pub struct UpperGradient {
    pub g: ScalarField,
    pub isolated: Vec<usize>,
}

/// `g(x) = max_{y ~ x} |f(x) − f(y)| / d(x,y)`; isolated points get 0 and are flagged.
pub fn graph_upper_gradient(space: &Space, f: &ScalarField) -> Result<UpperGradient> {
    f.check_space(space)?;
    if !space.has_adjacency() {
        return Err(Error::Precondition("upper gradient needs an adjacency structure".into()));
    }
    let v = f.values();
    let mut isolated = Vec::new();
    let g: Vec<f64> = (0..space.len())
        .map(|x| {
            let nb = space.neighbors(x);
            if nb.is_empty() {
                isolated.push(x);
            }
            nb.iter()
                .map(|&y| (v[x] - v[y]).abs() / space.dist(x, y))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(UpperGradient {
        g: ScalarField::new(space, g)?,
        isolated,
    })
}

/// Checks the trapezoidal upper-gradient rule on every edge and along each
/// sampled path of adjacent points.
pub fn verify_upper_gradient(
    space: &Space,
    f: &ScalarField,
    g: &ScalarField,
    paths: &[Vec<usize>],
) -> Result<bool> {
    f.check_space(space)?;
    g.check_space(space)?;
    let (fv, gv) = (f.values(), g.values());
    for path in paths {
        for w in path.windows(2) {
            if !space.is_adjacent(w[0], w[1]) {
                return Err(invalid(format!("path step {} -> {} is not an edge", w[0], w[1])));
            }
        }
    }
    let edge_ok = space.edges().iter().all(|&(u, v)| {
        (fv[u] - fv[v]).abs() <= 0.5 * (gv[u] + gv[v]) * space.dist(u, v) + UPPER_GRADIENT_TOL
    });
    if !edge_ok {
        return Ok(false);
    }
    let paths_ok = paths.iter().all(|path| {
        if path.len() < 2 {
            return true;
        }
        let along: f64 = path
            .windows(2)
            .map(|w| 0.5 * (gv[w[0]] + gv[w[1]]) * space.dist(w[0], w[1]))
            .sum();
        (fv[path[0]] - fv[path[path.len() - 1]]).abs() <= along + UPPER_GRADIENT_TOL
    });
    Ok(paths_ok)
}
