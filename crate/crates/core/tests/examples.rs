use metric_lab::ahlfors::{default_window, select_centers};
use metric_lab::random::derive_seed;
use metric_lab::verify::{FunctionalParams, SharpnessConfig, Thm2Evaluator};
use metric_lab::*;

fn certified(space: &Space) -> AhlforsCertificate {
    let (lo, hi) = default_window(space);
    certify_ahlfors(space, lo, hi, &select_centers(space, CenterSelection::Interior, hi)).unwrap()
}

#[test]
fn thm2_on_a_24_grid() {
    let s = Space::grid(2, 24, WeightMode::CellVolume).unwrap();
    let cert = certified(&s);
    assert!((1.9..=2.15).contains(&cert.nu_hat));
    let ctx = CheckContext::new(&s, &cert);
    let params = PointwiseParams { s: Some(1.0), p: 1.5, q: 1.5 };
    let f = FieldDistribution::default().sample(&s, 21).unwrap();
    let r = check_pointwise_theorem(&ctx, None, &f, None, Theorem::Thm2, &params).unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.empirical_constant.is_finite());
    let back = InequalityReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let csv = r.to_csv();
    assert!(csv.starts_with("point_id,lhs,rhs,ratio\n"));
    assert_eq!(csv.lines().count(), s.len() + 1);
}

#[test]
fn annuli_inherit_shell_nullity() {
    let s = Space::grid(2, 8, WeightMode::CellVolume).unwrap();
    let k = build_rough_kernel(&s, 2.0, AngularPattern::RandomPm1 { seed: 3 }, true).unwrap();
    let audit = verify_kernel(&s, &k).unwrap();
    let scale = k.scale(&s);
    // brute force over every pair of distinct distances a < b
    let mut dists: Vec<f64> = s.distance_matrix().to_vec();
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    let mut worst: f64 = 0.0;
    for x in 0..s.len() {
        for (i, &a) in dists.iter().enumerate() {
            for &b in &dists[i + 1..] {
                let sum: f64 = (0..s.len())
                    .filter(|&y| y != x && s.dist(x, y) > a && s.dist(x, y) < b)
                    .map(|y| k.get(x, y) * s.weight(y))
                    .sum();
                worst = worst.max(sum.abs());
            }
        }
    }
    assert!(worst <= 1e-9 * scale);
    assert!(audit.annulus_residual <= audit.max_shell_count as f64 * audit.null_residual.max(f64::EPSILON * scale));
}

#[test]
fn lorentz_endpoint_and_morrey_functionals() {
    let s = Space::grid(2, 16, WeightMode::CellVolume).unwrap();
    let cert = certified(&s);
    let ctx = CheckContext::new(&s, &cert);
    let k = build_rough_kernel(&s, 2.0, AngularPattern::SignFirstCoordinate, true).unwrap();
    let f = FieldDistribution::Bumps { count: 2 }.sample(&s, 5).unwrap();
    let g = graph_upper_gradient(&s, &f).unwrap().g;
    let params = FunctionalParams { p: 1.2, q: 1.5 };
    let endpoint = check_functional(&ctx, &k, &f, &g, &FunctionalCase::LorentzEndpoint { r: None }, &params).unwrap();
    assert!(endpoint.empirical_constant.is_finite() && endpoint.empirical_constant > 0.0);
    let morrey = check_functional(&ctx, &k, &f, &g, &FunctionalCase::Morrey { p1: 5.0, q1: 6.0 }, &params).unwrap();
    assert!(morrey.empirical_constant.is_finite());
    let bad = check_functional(&ctx, &k, &f, &g, &FunctionalCase::Morrey { p1: 6.0, q1: 5.0 }, &params);
    assert!(matches!(bad, Err(Error::InvalidArgument(_))));
}

#[test]
fn poincare_on_a_line() {
    let s = Space::grid(1, 32, WeightMode::UniformTotal1).unwrap();
    let f = ScalarField::from_coords(&s, |c| c[0]).unwrap();
    let g = graph_upper_gradient(&s, &f).unwrap().g;
    let params = PoincareParams::new(1.0, 2.0, 2.0).unwrap();
    let balls: Vec<(usize, f64)> = (0..32).step_by(3).map(|c| (c, 0.2)).collect();
    let est = estimate_poincare_constant(&s, &params, &[(f, g)], &balls).unwrap();
    assert!(est.constant.is_finite() && est.constant > 0.0);
    assert_eq!(est.infinite, 0);
    let report = verify::poincare_report(&params, &est, None);
    assert!(report.passed);
}

#[test]
fn hill_climb_stays_near_random_sweep() {
    let s = Space::grid(2, 12, WeightMode::CellVolume).unwrap();
    let cert = certified(&s);
    let ctx = CheckContext::new(&s, &cert);
    let config = SharpnessConfig {
        which: Theorem::Thm2,
        params: PointwiseParams { s: Some(1.0), p: 1.5, q: 1.5 },
        start: FieldDistribution::default(),
    };
    let best = (0..5)
        .map(|seed| sharpness_search(&ctx, None, &config, 2000, seed).unwrap().best_ratio)
        .fold(0.0, f64::max);
    let eval = Thm2Evaluator::new(&s, 1.0, 1.5, 1.5, cert.nu_hat).unwrap();
    let sweep = (0..100_000u64)
        .map(|i| eval.ratio(&config.start.sample(&s, derive_seed(99, i)).unwrap()).unwrap())
        .fold(0.0, f64::max);
    assert!(best <= 1.5 * sweep, "climb {best} vs sweep {sweep}");
}
