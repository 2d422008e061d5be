use metric_lab::ahlfors::{check_doubling, condition_from_parts, default_window, select_centers};
use metric_lab::norms::{lebesgue_norm, lorentz_norm, morrey_norm};
use metric_lab::*;
use proptest::prelude::*;

fn small_space(kind: u8) -> Space {
    match kind % 4 {
        0 => Space::grid(1, 12, WeightMode::UniformTotal1).unwrap(),
        1 => Space::grid(2, 6, WeightMode::CellVolume).unwrap(),
        2 => Space::cantor(4, 1).unwrap(),
        _ => Space::cantor(2, 2).unwrap(),
    }
}

fn field(space: &Space, values: &[f64]) -> ScalarField {
    ScalarField::new(space, values.iter().cycle().take(space.len()).copied().collect()).unwrap()
}

fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

prop_compose! {
    fn values()(v in prop::collection::vec(-10.0f64..10.0, 1..64)) -> Vec<f64> { v }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn balls_grow_with_radius(kind in 0u8..4, c in 0usize..64, r1 in 0.001f64..1.5, dr in 0.0f64..1.0) {
        let s = small_space(kind);
        let c = c % s.len();
        let a = s.ball(c, r1).unwrap();
        let b = s.ball(c, r1 + dr).unwrap();
        prop_assert!(a.members.contains(&c));
        prop_assert!(a.members.iter().all(|m| b.members.contains(m)));
        prop_assert!(a.mass <= b.mass);
    }

    #[test]
    fn maximal_is_sublinear_and_dominating(kind in 0u8..4, f in values(), g in values(), lambda in -5.0f64..5.0) {
        let s = small_space(kind);
        let (f, g) = (field(&s, &f), field(&s, &g));
        let mf = maximal_function(&s, &f).unwrap();
        let mg = maximal_function(&s, &g).unwrap();
        let sum = maximal_function(&s, &f.zip_with(&g, |a, b| a + b).unwrap()).unwrap();
        let scaled = maximal_function(&s, &f.scale(lambda)).unwrap();
        for i in 0..s.len() {
            prop_assert!(le(sum.values()[i], mf.values()[i] + mg.values()[i]));
            prop_assert!(close(scaled.values()[i], lambda.abs() * mf.values()[i], 1e-12) || lambda == 0.0);
            prop_assert!(le(f.values()[i].abs(), mf.values()[i]));
        }
    }

    #[test]
    fn maximal_singular_is_sublinear(kind in 0u8..4, f in values(), g in values(), lambda in -5.0f64..5.0, seed in 0u64..100) {
        let s = small_space(kind);
        let k = build_rough_kernel(&s, 1.0, AngularPattern::RandomPm1 { seed }, true).unwrap();
        let (f, g) = (field(&s, &f), field(&s, &g));
        let tf = maximal_singular(&s, &k, &f).unwrap();
        let tg = maximal_singular(&s, &k, &g).unwrap();
        let sum = maximal_singular(&s, &k, &f.zip_with(&g, |a, b| a + b).unwrap()).unwrap();
        let scaled = maximal_singular(&s, &k, &f.scale(lambda)).unwrap();
        let tol = 1e-12 * k.scale(&s) * (f.max_abs() + g.max_abs()) * s.len() as f64;
        for i in 0..s.len() {
            prop_assert!(sum.values()[i] <= tf.values()[i] + tg.values()[i] + tol);
            prop_assert!((scaled.values()[i] - lambda.abs() * tf.values()[i]).abs() <= tol * lambda.abs().max(1.0));
        }
    }

    #[test]
    fn riesz_is_positive_and_monotone(kind in 0u8..4, f in values(), bump in values(), sexp in 0.1f64..3.0) {
        let s = small_space(kind);
        let f = field(&s, &f).abs();
        let g = f.zip_with(&field(&s, &bump).abs(), |a, b| a + b).unwrap();
        let rf = riesz_potential(&s, &f, sexp).unwrap();
        let rg = riesz_potential(&s, &g, sexp).unwrap();
        for i in 0..s.len() {
            prop_assert!(rf.values()[i] >= 0.0);
            prop_assert!(le(rf.values()[i], rg.values()[i]));
        }
    }

    #[test]
    fn norms_are_monotone_and_homogeneous(kind in 0u8..4, f in values(), shrink in prop::collection::vec(0.0f64..1.0, 64), lambda in 0.01f64..50.0) {
        let s = small_space(kind);
        let f = field(&s, &f);
        let g = f.zip_with(&field(&s, &shrink), |a, b| a * b).unwrap();
        let specs = [
            NormSpec::Lebesgue { p: 1.7 },
            NormSpec::Lorentz { r: 2.0, m: LorentzIndex::Finite(1.5) },
            NormSpec::Lorentz { r: 2.0, m: LorentzIndex::Infinite },
            NormSpec::Morrey { p: 1.5, q: 3.0 },
            NormSpec::Orlicz { phi: YoungFunction::power_log(2.0) },
        ];
        for spec in &specs {
            let nf = spec.norm(&s, &f).unwrap();
            prop_assert!(le(spec.norm(&s, &g).unwrap(), nf));
            prop_assert!(close(spec.norm(&s, &f.scale(lambda)).unwrap(), lambda * nf, 1e-8));
        }
    }

    #[test]
    fn power_identities(kind in 0u8..4, f in values(), rho_index in 0usize..3) {
        let rho = [0.5, 1.0, 2.0][rho_index];
        let s = small_space(kind);
        let f = field(&s, &f);
        let fr = f.map(|v| v.abs().powf(rho));
        prop_assert!(close(lebesgue_norm(&s, &fr, 2.5).unwrap(), lebesgue_norm(&s, &f, 2.5 * rho).unwrap().powf(rho), 1e-10));
        prop_assert!(close(
            lorentz_norm(&s, &fr, 2.5, LorentzIndex::Finite(2.2)).unwrap(),
            lorentz_norm(&s, &f, 2.5 * rho, LorentzIndex::Finite(2.2 * rho)).unwrap().powf(rho),
            1e-10
        ));
        prop_assert!(close(morrey_norm(&s, &fr, 2.2, 3.0).unwrap(), morrey_norm(&s, &f, 2.2 * rho, 3.0 * rho).unwrap().powf(rho), 1e-10));
    }

    #[test]
    fn condition_is_monotone_in_ratio(nu in 0.2f64..4.0, a in 1.0f64..10.0, b in 1.0f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = condition_from_parts(nu, lo);
        let y = condition_from_parts(nu, hi);
        prop_assert!(x.value <= y.value);
        prop_assert!(!(y.holds && !x.holds));
    }

    #[test]
    fn projection_is_idempotent(kind in 0u8..4, seed in 0u64..1000) {
        let s = small_space(kind);
        let raw = build_rough_kernel(&s, 1.5, AngularPattern::RandomPm1 { seed }, false).unwrap();
        let once = build_rough_kernel(&s, 1.5, AngularPattern::RandomPm1 { seed }, true).unwrap();
        let mut twice = once.clone();
        twice.project(&s);
        let scale = once.scale(&s).max(1e-300);
        for x in 0..s.len() {
            for y in (0..s.len()).filter(|&y| y != x) {
                prop_assert!((once.get(x, y) - twice.get(x, y)).abs() <= 1e-14 * scale);
            }
        }
        prop_assert!(once.size_constant <= 2.0 * raw.size_constant + 1e-12);
        prop_assert!(once.shell_null_residual <= 1e-12 * scale);
    }
}

#[test]
fn triangle_inequality_on_built_spaces() {
    let spaces = [
        Space::grid(1, 50, WeightMode::UniformTotal1).unwrap(),
        Space::grid(2, 16, WeightMode::CellVolume).unwrap(),
        Space::grid(3, 6, WeightMode::CellVolume).unwrap(),
        Space::cantor(6, 1).unwrap(),
        Space::cantor(3, 2).unwrap(),
    ];
    for s in &spaces {
        assert_eq!(s.triangle_violations(10_000, 1), 0);
    }
}

#[test]
fn doubling_chain_holds_on_certified_spaces() {
    for s in [
        Space::grid(2, 32, WeightMode::CellVolume).unwrap(),
        Space::cantor(6, 1).unwrap(),
        Space::grid(1, 64, WeightMode::UniformTotal1).unwrap(),
    ] {
        let (lo, hi) = default_window(&s);
        let cert = certify_ahlfors(&s, lo, hi, &select_centers(&s, CenterSelection::All, hi)).unwrap();
        let d = check_doubling(&s, &cert).unwrap();
        assert!(d.d_empirical.is_finite());
        assert!(d.d_empirical <= d.d_theory * (1.0 + 1e-12));
        assert_eq!(cert.soundness_violations(&s), 0);
    }
}

#[test]
fn reports_are_scale_invariant_and_deterministic() {
    let s = Space::grid(2, 12, WeightMode::CellVolume).unwrap();
    let (lo, hi) = default_window(&s);
    let cert = certify_ahlfors(&s, lo, hi, &select_centers(&s, CenterSelection::Interior, hi)).unwrap();
    let ctx = CheckContext::new(&s, &cert);
    let k = build_rough_kernel(&s, 2.0, AngularPattern::SignFirstCoordinate, true).unwrap();
    let f = FieldDistribution::Bumps { count: 2 }.sample(&s, 4).unwrap();
    let params = PointwiseParams { s: Some(1.0), p: 1.5, q: 1.5 };
    for lambda in [1e-3, 0.7, 250.0] {
        let fl = f.scale(lambda);
        for which in [Theorem::Thm1, Theorem::Thm2, Theorem::Thm3] {
            let g = graph_upper_gradient(&s, &f).unwrap().g;
            let gl = graph_upper_gradient(&s, &fl).unwrap().g;
            let a = check_pointwise_theorem(&ctx, Some(&k), &f, Some(&g), which, &params).unwrap();
            let b = check_pointwise_theorem(&ctx, Some(&k), &fl, Some(&gl), which, &params).unwrap();
            assert!(close(a.empirical_constant, b.empirical_constant, 1e-10), "{which:?} {lambda}");
            let again = check_pointwise_theorem(&ctx, Some(&k), &f, Some(&g), which, &params).unwrap();
            assert_eq!(a.to_json(), again.to_json());
        }
    }
}
