mod common;

use adscreen::domain::{AdPaymentSchedule, Axis, CanonicalMechanism, DensityKind, DensityModel, HalfPlane, Region, RegionLabel, TypeSpace};
use adscreen::measure::{build_measure, hinge_tail_by_fubini, hinge_tail_integral, ibp_residual, marginal_m, mu_of_region};
use adscreen::quadrature::QuadratureSpec;
use adscreen::test_functions::{ExpAffine, Hinge, Linear, Quadratic, SmoothedHinge};
use common::*;
use proptest::prelude::*;

fn density_strategy() -> impl Strategy<Value = (DensityKind, TypeSpace)> {
    let space = (0.0..1.0f64, 0.5..1.5f64, -1.5..-0.5f64, 0.0..0.4f64)
        .prop_map(|(lo1, w1, lo2, gap)| TypeSpace::new(lo1, lo1 + w1, lo2, -gap).unwrap());
    let kind = prop_oneof![
        Just(DensityKind::Uniform),
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| DensityKind::LogLinear { a, b }),
        (0.2..2.0f64, 0.0..1.0f64, 1.6..2.5f64, 0.0..1.0f64)
            .prop_map(|(a0, a1, b0, b1)| DensityKind::ProductPolynomial { coeffs1: vec![a0, a1], coeffs2: vec![b0, b1] }),
    ];
    (kind, space)
}

fn payment_strategy() -> impl Strategy<Value = AdPaymentSchedule> {
    prop_oneof![
        (0.0..2.0f64).prop_map(AdPaymentSchedule::Constant),
        (1.3..2.0f64, -0.3..0.3f64, -0.3..0.3f64).prop_map(|(c0, c1, c2)| AdPaymentSchedule::affine(c0, c1, c2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn total_mass_vanishes((kind, space) in density_strategy(), kappa in payment_strategy()) {
        let d = DensityModel::new(kind, space).unwrap();
        let m = build_measure(&d, &kappa, &QuadratureSpec::default()).unwrap();
        let total = mu_of_region(&m, &Region::full(space)).unwrap().total();
        prop_assert!(total.abs() < 1e-8, "mu(X) = {total}");
    }

    #[test]
    fn integration_by_parts_holds(
        (kind, space) in density_strategy(),
        kappa in payment_strategy(),
        pick in 0usize..4,
        c in prop::array::uniform4(-1.0..1.0f64),
    ) {
        let d = DensityModel::new(kind, space).unwrap();
        let q = QuadratureSpec::default();
        let mid = 0.5 * (space.x1_lo + space.x1_hi);
        let r = match pick {
            0 => ibp_residual(&d, &kappa, &Linear { c0: c[0], c1: c[1], c2: c[2] }, &q),
            1 => ibp_residual(&d, &kappa, &Quadratic { a11: c[0].abs(), a12: 0.1 * c[1], a22: c[2].abs(), b1: c[3], b2: c[0], c: 0.0 }, &q),
            2 => ibp_residual(&d, &kappa, &ExpAffine { scale: 1.0, w1: c[0], w2: c[1], shift: c[2] }, &q),
            _ => ibp_residual(&d, &kappa, &SmoothedHinge::of(Hinge { w1: 1.0, w2: 0.0, t: mid }, 1e-3), &q),
        }
        .unwrap();
        prop_assert!(r < 1e-5, "residual {r}");
    }

    #[test]
    fn disjoint_regions_add((kind, space) in density_strategy(), k in 0.0..2.0f64, s in 0.05..0.95f64, t in 0.05..0.95f64) {
        let d = DensityModel::new(kind, space).unwrap();
        let m = build_measure(&d, &AdPaymentSchedule::Constant(k), &QuadratureSpec::default()).unwrap();
        let cut = space.x1_lo + s * space.width() + space.x2_lo + t * space.height();
        let full = Region::full(space);
        let a = full.clone().with(HalfPlane::le(Axis::Sum, cut));
        let b = full.clone().with(HalfPlane::gt(Axis::Sum, cut));
        let sum = mu_of_region(&m, &a).unwrap().total() + mu_of_region(&m, &b).unwrap().total();
        prop_assert!((sum - mu_of_region(&m, &full).unwrap().total()).abs() < 1e-8);
    }

    #[test]
    fn closed_form_agrees_with_quadrature(lo1 in 0.0..1.0f64, k in 0.0..2.0f64, cut in 0.0..1.0f64, x2 in 0.0..1.0f64) {
        let s = TypeSpace::new(lo1, lo1 + 1.0, -1.0, 0.0).unwrap();
        let m = uniform_measure(s, k);
        let r = Region::full(s)
            .with(HalfPlane::le(Axis::Sum, lo1 - 1.0 + 2.0 * cut))
            .with(HalfPlane::ge(Axis::X2, -x2));
        let closed = m.mu_closed_form(&r).unwrap().total();
        let numeric = mu_of_region(&m, &r).unwrap().total();
        prop_assert!((closed - numeric).abs() < 1e-8, "{closed} vs {numeric}");
    }
}

#[test]
fn closed_form_densities_of_the_examples() {
    let c = uniform_measure(shifted_space(), 1.5).closed_form().copied().unwrap();
    assert_eq!((c.bottom, c.top, c.left, c.right, c.interior), (-0.5, 1.5, -1.0, 2.0, -3.0));
    let c = uniform_measure(unit_space(), 0.0).closed_form().copied().unwrap();
    assert_eq!((c.bottom, c.top, c.left, c.right, c.interior), (1.0, 0.0, 0.0, 1.0, -3.0));
    let c = uniform_measure(shifted_space(), 0.5).closed_form().copied().unwrap();
    assert_eq!((c.bottom, c.top, c.left, c.right, c.interior), (0.5, 0.5, -1.0, 2.0, -3.0));
}

#[test]
fn lower_right_orthants_on_the_unit_square() {
    let m = uniform_measure(unit_space(), 0.0);
    for i in 0..=20 {
        for j in 0..=20 {
            let (x1, x2) = (i as f64 / 20.0, -1.0 + j as f64 / 20.0);
            let r = Region::full(unit_space()).with(HalfPlane::ge(Axis::X1, x1)).with(HalfPlane::le(Axis::X2, x2));
            let v = mu_of_region(&m, &r).unwrap().total();
            assert!((v - ex3_lower_right(x1, x2)).abs() < 1e-6, "({x1}, {x2}): {v}");
        }
    }
}

#[test]
fn marginal_and_hinge_tail_on_the_unit_square() {
    let m = uniform_measure(unit_space(), 0.0);
    let full = Region::full(unit_space());
    for x1 in [0.0, 0.25, 0.5] {
        assert!((marginal_m(&m, &full, x1).unwrap() - (1.0 - 2.0 * x1)).abs() < 1e-8);
    }
    for t in [0.0, 0.25, 0.5] {
        let v = hinge_tail_integral(&m, &full, t, 0.5).unwrap();
        assert!((v - (0.25 - t + t * t)).abs() < 1e-8, "t = {t}: {v}");
        assert!((v - hinge_tail_by_fubini(&m, &full, t, 0.5).unwrap()).abs() < 1e-8);
    }
    assert_eq!(hinge_tail_integral(&m, &full, 0.5, 0.5).unwrap(), 0.0);
}

#[test]
fn marginal_at_the_left_edge_is_atom_plus_left_edge() {
    let m = uniform_measure(shifted_space(), 0.5);
    let v = marginal_m(&m, &Region::full(shifted_space()), 1.0).unwrap();
    // atom 1, left edge density -1 over length 1
    assert!((v - 0.0).abs() < 1e-12, "{v}");
}

#[test]
fn single_bundle_no_purchase_mass() {
    let m = uniform_measure(shifted_space(), 1.5);
    for p in [0.1, 0.3, 0.4574, 0.6] {
        let z = Region::full(shifted_space()).with(HalfPlane::le(Axis::Sum, p));
        let v = mu_of_region(&m, &z).unwrap().total();
        assert!((v - (1.0 - 1.5 * p - 1.5 * p * p)).abs() < 1e-8, "p = {p}: {v}");
    }
}

#[test]
fn single_bundle_rectangles_and_left_edge() {
    let s = shifted_space();
    let m = uniform_measure(s, 1.5);
    let p = example4_price();
    // interior anchors only; at x1 = 1 the left edge contributes as well
    for i in 1..=10 {
        for j in 1..=10 {
            let (x1, x2) = (1.0 + i as f64 / 10.0, -1.0 + j as f64 / 10.0);
            let rect = Region::full(s).with(HalfPlane::ge(Axis::X1, x1)).with(HalfPlane::ge(Axis::X2, x2));
            let v = mu_of_region(&m, &rect).unwrap().total();
            assert!((v - ex4_rectangle(x1, x2)).abs() < 1e-6);
        }
    }
    let y = CanonicalMechanism::SingleBundle { p_sb: p }.region(&s, RegionLabel::Y).unwrap();
    for j in 1..=20 {
        let x2 = -1.0 + j as f64 / 20.0;
        let r = Region::full(s).with(HalfPlane::ge(Axis::X2, x2)).intersect(&y);
        let v = mu_of_region(&m, &r).unwrap().total();
        assert!((v - ex4_left_edge(x2, p)).abs() < 1e-6, "x2 = {x2}: {v} vs {}", ex4_left_edge(x2, p));
    }
}

#[test]
fn two_price_orthant_cases() {
    let s = shifted_space();
    let m = uniform_measure(s, 0.5);
    let (pg, psb) = example5_root();
    let mech = CanonicalMechanism::AdTiered { p_g: pg, p_sb: psb };
    let y = mech.region(&s, RegionLabel::Y).unwrap();
    let w = mech.region(&s, RegionLabel::W).unwrap();
    let mut hit = [0usize; 4];
    for i in 0..=40 {
        for j in 0..=40 {
            let (x1, x2) = (1.0 + i as f64 / 40.0, -1.0 + j as f64 / 40.0);
            if let Some(f) = ex5_y_orthant(x1, x2, pg, psb) {
                let r = Region::full(s).with(HalfPlane::ge(Axis::X1, x1)).with(HalfPlane::ge(Axis::X2, x2)).intersect(&y);
                let v = mu_of_region(&m, &r).unwrap().total();
                assert!((v - f).abs() < 1e-6, "Y orthant at ({x1}, {x2}): {v} vs {f}");
                let case = if x1 > 1.0 { if x1 + x2 > psb && x2 > psb - pg { 0 } else { 1 } } else if x2 <= psb - 1.0 { 2 } else { 3 };
                hit[case] += 1;
            }
            if w.contains([x1, x2]) {
                let r = Region::full(s).with(HalfPlane::ge(Axis::X1, x1)).with(HalfPlane::le(Axis::X2, x2)).intersect(&w);
                let v = mu_of_region(&m, &r).unwrap().total();
                assert!((v - ex5_w_orthant(x1, x2)).abs() < 1e-6);
            }
        }
    }
    assert!(hit.iter().all(|&h| h > 0), "cases sampled: {hit:?}");
}

#[test]
fn two_price_marginal_and_tail() {
    let s = shifted_space();
    let m = uniform_measure(s, 0.5);
    let (pg, psb) = example5_root();
    let z = CanonicalMechanism::AdTiered { p_g: pg, p_sb: psb }.region(&s, RegionLabel::Z).unwrap();
    for x1 in [1.0, 1.03, 1.06, 1.1, pg] {
        let v = marginal_m(&m, &z, x1).unwrap();
        assert!((v - ex5_marginal(x1, psb)).abs() < 1e-8, "x1 = {x1}");
    }
    for t in [1.0, 1.05, 1.1] {
        let v = hinge_tail_integral(&m, &z, t, pg).unwrap();
        assert!((v - ex5_tail(t, pg, psb)).abs() < 1e-8);
    }
}

#[test]
fn regions_outside_the_space_are_rejected() {
    let m = uniform_measure(unit_space(), 0.0);
    assert!(mu_of_region(&m, &Region::full(shifted_space())).is_err());
}

#[test]
fn general_payment_needs_its_derivative() {
    use std::sync::Arc;
    let d = DensityModel::uniform(unit_space()).unwrap();
    let k = AdPaymentSchedule::general("x1", Arc::new(|x: [f64; 2]| x[0]), None);
    assert!(build_measure(&d, &k, &QuadratureSpec::default()).is_err());
}

#[test]
fn kinked_test_functions_are_rejected() {
    let d = DensityModel::uniform(unit_space()).unwrap();
    let r = ibp_residual(&d, &AdPaymentSchedule::Constant(0.0), &Hinge { w1: 1.0, w2: 0.0, t: 0.5 }, &QuadratureSpec::default());
    assert!(r.is_err());
}
