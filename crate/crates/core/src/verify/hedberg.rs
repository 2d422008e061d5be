use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::{CheckContext, InequalityId, InequalityReport};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::norms::{log_grid, morrey_norm};
use crate::operators::maximal_function;
use crate::space::Space;

/// Allowed gap between the bound at the balancing radius and the best grid radius.
pub const HEDBERG_FACTOR: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    /// Split radii; empty means [`default_k_grid`].
    #[serde(default)]
    pub k_grid: Vec<f64>,
    /// Sample points; empty means five seeded points.
    #[serde(default)]
    pub points: Vec<usize>,
}

/// 25 log-spaced split radii from half the minimal spacing to twice the diameter.
pub fn default_k_grid(space: &Space) -> Vec<f64> {
    log_grid(0.5 * space.min_spacing(), 2.0 * space.diameter(), 25)
}

pub fn default_points(space: &Space, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = sample(&mut rng, space.len(), space.len().min(5)).into_vec();
    pts.sort_unstable();
    pts
}

/// Per-point outcome of the split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergPoint {
    pub point: usize,
    pub maximal: f64,
    pub k_star: f64,
    pub bound_at_k_star: f64,
    pub grid_min: f64,
    pub ratio: f64,
    pub r1_monotone: bool,
}

/// Near and far parts of `R_s|f|(x)` split at every radius of `grid`.
fn split_sums(space: &Space, f: &[f64], s: f64, x: usize, grid: &[f64]) -> Vec<(f64, f64)> {
    let sh = space.shells(x);
    // (distance, term) in increasing distance
    let mut terms = Vec::with_capacity(space.len());
    for k in 1..sh.len() {
        let m = sh.mass_before(k);
        for &y in sh.members(k) {
            let y = y as usize;
            let d = space.dist(x, y);
            terms.push((d, d.powf(s) / m * f[y].abs() * space.weight(y)));
        }
    }
    let total: f64 = terms.iter().map(|t| t.1).sum();
    grid.iter()
        .map(|&kk| {
            let near: f64 = terms.iter().take_while(|t| t.0 < kk).map(|t| t.1).sum();
            let far: f64 = terms.iter().skip_while(|t| t.0 < kk).map(|t| t.1).sum();
            debug_assert!((near + far - total).abs() <= 1e-12 * total.max(1e-300));
            (near, far)
        })
        .collect()
}

/// Splits `R_s|f|` at each `𝒦` into `R₁ + R₂`, measures the constants of
/// `R₁ ≤ C₁𝒦^s Mf` and `R₂ ≤ C₂𝒦^{s−ν/q}‖f‖_{M^{p,q}}`, and compares the bound
/// at `𝒦* = (Mf/‖f‖)^{−q/ν}` with its minimum over the grid.
pub fn check_hedberg_split(
    ctx: &CheckContext<'_>,
    f: &ScalarField,
    params: &HedbergParams,
) -> Result<(InequalityReport, Vec<HedbergPoint>)> {
    let space = ctx.space;
    f.check_space(space)?;
    let nu = ctx.nu();
    let HedbergParams { s, p, q, .. } = *params;
    if !(p > 1.0 && p <= q && q.is_finite()) {
        return Err(invalid(format!("Morrey exponents need 1 < p ≤ q < ∞, got p = {p}, q = {q}")));
    }
    if !(s > 0.0 && s < nu / q) {
        return Err(invalid(format!("split needs 0 < s < ν/q, got s = {s}, ν/q = {}", nu / q)));
    }
    if f.max_abs() == 0.0 {
        return Err(invalid("split radius is undefined for f ≡ 0"));
    }
    let grid = if params.k_grid.is_empty() {
        default_k_grid(space)
    } else {
        params.k_grid.clone()
    };
    if grid.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(invalid("split radii must be positive"));
    }
    let points = if params.points.is_empty() {
        default_points(space, ctx.seed.unwrap_or(0))
    } else {
        params.points.clone()
    };
    if points.iter().any(|&x| x >= space.len()) {
        return Err(invalid("sample point out of range"));
    }
    let abs = f.abs();
    let mf = maximal_function(space, &abs)?;
    let norm = morrey_norm(space, &abs, p, q)?;
    let far_exp = s - nu / q;

    let splits: Vec<Vec<(f64, f64)>> = points
        .iter()
        .map(|&x| split_sums(space, abs.values(), s, x, &grid))
        .collect();
    let (mut c1, mut c2): (f64, f64) = (0.0, 0.0);
    for (i, &x) in points.iter().enumerate() {
        let m = mf.values()[x];
        for (j, &kk) in grid.iter().enumerate() {
            let (near, far) = splits[i][j];
            c1 = c1.max(near / (kk.powf(s) * m));
            c2 = c2.max(far / (kk.powf(far_exp) * norm));
        }
    }
    let bound = |m: f64, kk: f64| c1 * kk.powf(s) * m + c2 * kk.powf(far_exp) * norm;

    let mut details = Vec::with_capacity(points.len());
    for (i, &x) in points.iter().enumerate() {
        let m = mf.values()[x];
        let k_star = (m / norm).powf(-q / nu);
        let at_star = bound(m, k_star);
        let grid_min = grid.iter().map(|&kk| bound(m, kk)).fold(f64::INFINITY, f64::min);
        let r1_monotone = splits[i].windows(2).all(|w| w[1].0 >= w[0].0 * (1.0 - 1e-12));
        details.push(HedbergPoint {
            point: x,
            maximal: m,
            k_star,
            bound_at_k_star: at_star,
            grid_min,
            ratio: at_star / grid_min,
            r1_monotone,
        });
    }

    let mut report = InequalityReport::new(InequalityId::HedbergSplit, "hedberg_split");
    ctx.stamp(&mut report);
    report.param("s", s);
    report.param("p", p);
    report.param("q", q);
    report.param("c1", c1);
    report.param("c2", c2);
    report.param("morrey_norm", norm);
    report.param("k_grid", &grid);
    report.param("points", &details);
    report.threshold = Some(HEDBERG_FACTOR);
    report.point_ids = points;
    report.lhs = details.iter().map(|d| d.bound_at_k_star).collect();
    report.rhs = details.iter().map(|d| d.grid_min).collect();
    report.tally(0.0);
    if details.iter().any(|d| !d.r1_monotone) {
        report.notes.push("near part decreased as the split radius grew".into());
        report.passed = false;
    }
    if !(c1.is_finite() && c2.is_finite()) {
        report.passed = false;
    }
    Ok((report, details))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahlfors::{certify_ahlfors, default_window, select_centers, CenterSelection};
    use crate::random::FieldDistribution;
    use crate::space::WeightMode;

    fn ctx_for(s: &Space) -> crate::ahlfors::AhlforsCertificate {
        let (lo, hi) = default_window(s);
        certify_ahlfors(s, lo, hi, &select_centers(s, CenterSelection::Interior, hi)).unwrap()
    }

    #[test]
    fn unit_function_balances_at_one() {
        let s = Space::grid(2, 12, WeightMode::CellVolume).unwrap();
        let cert = ctx_for(&s);
        let ctx = CheckContext::new(&s, &cert);
        let params = HedbergParams { s: 0.5, p: 1.5, q: 1.5, k_grid: vec![], points: vec![] };
        let (_, pts) = check_hedberg_split(&ctx, &ScalarField::constant(&s, 1.0), &params).unwrap();
        for d in pts {
            assert!((d.maximal - 1.0).abs() < 1e-12);
            assert!((d.k_star - 1.0).abs() < 1e-9);
            assert!(d.r1_monotone);
        }
    }

    #[test]
    fn random_field_within_factor() {
        let s = Space::grid(2, 12, WeightMode::CellVolume).unwrap();
        let cert = ctx_for(&s);
        let ctx = CheckContext::new(&s, &cert);
        let f = FieldDistribution::default().sample(&s, 3).unwrap();
        let params = HedbergParams { s: 1.0, p: 1.5, q: 1.5, k_grid: vec![], points: vec![] };
        let (report, pts) = check_hedberg_split(&ctx, &f, &params).unwrap();
        assert!(report.passed, "{:?}", pts);
    }

    #[test]
    fn rejects_zero_and_bad_order() {
        let s = Space::grid(2, 12, WeightMode::CellVolume).unwrap();
        let cert = ctx_for(&s);
        let ctx = CheckContext::new(&s, &cert);
        let params = HedbergParams { s: 1.0, p: 1.5, q: 1.5, k_grid: vec![], points: vec![] };
        assert!(check_hedberg_split(&ctx, &ScalarField::constant(&s, 0.0), &params).is_err());
        let bad = HedbergParams { s: 5.0, ..params };
        assert!(check_hedberg_split(&ctx, &ScalarField::constant(&s, 1.0), &bad).is_err());
    }
}
