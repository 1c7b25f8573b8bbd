use std::f64::consts::{FRAC_PI_2, PI, TAU};

use graftlab::annuli::{
    from_log_coords, grafting_sector_angles, modulus, standard_collar_modulus, to_log_coords,
    RoundAnnulus,
};
use graftlab::dynamics::{
    decay_factor, endpoint_cauchy_analysis, iterate_grafting, iterated_lift_radius,
};
use graftlab::grafting::{
    bounding_annulus_moduli, collar_containment_check, graft_length_bounds, support_step,
    weighted_sum, CurveRole, LengthInterval, LengthState, WeightedMulticurve,
};
use graftlab::hypgeom::{
    annulus_angle, collar_angle, collar_quotient_h, collar_width, freehomotopy_distance,
    separation_factor, HypLength,
};
use graftlab::qcmaps::{
    beltrami_estimate, dilatation, shear_bound, twist_amount_bound, twist_dilatation,
    BoundaryDistortion, Composed, GridMap, LogCoordMap, ScalingMap, ShearingMap, TwistMap,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn hl(v: f64) -> HypLength {
    HypLength::new(v).unwrap()
}

fn short_state(curves: &[(&str, CurveRole, f64, f64)]) -> LengthState {
    LengthState::new(
        curves
            .iter()
            .map(|&(id, role, lo, hi)| (id.into(), role, LengthInterval::new(lo, hi).unwrap())),
        0.1,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn angles_live_in_the_quarter_turn(r in 1e-6f64..20.0, l in 1e-6f64..20.0) {
        let p = annulus_angle(r).unwrap().0;
        let th = collar_angle(hl(l)).0;
        prop_assert!(p > 0.0 && p < FRAC_PI_2);
        prop_assert!(th > 0.0 && th < FRAC_PI_2);
        prop_assert!(p <= r);
    }

    #[test]
    fn collar_angle_decreases(l in 1e-4f64..5.0, dl in 1e-4f64..1.0) {
        prop_assert!(collar_angle(hl(l + dl)).0 < collar_angle(hl(l)).0);
    }

    #[test]
    fn collar_quotient_bounds(x in 1e-4f64..1.0) {
        let h = collar_quotient_h(x).unwrap();
        prop_assert!(h <= x * x / 16.0);
        let m = collar_width(hl(x));
        // exp(-x/2) near 1 loses digits inside artanh as x -> 0
        prop_assert!((h - (-2.0 * m).exp()).abs() <= 1e-14 * h / x);
    }

    #[test]
    fn freehomotopy_is_monotone_in_the_long_curve(
        geo in 1e-3f64..1.0, a in 0.0f64..1.0, b in 1e-3f64..1.0,
    ) {
        let d1 = freehomotopy_distance(hl(geo * (1.0 + a)), hl(geo)).unwrap();
        let d2 = freehomotopy_distance(hl(geo * (1.0 + a + b)), hl(geo)).unwrap();
        prop_assert!(d1 >= 0.0);
        prop_assert!(d2 >= d1);
    }

    #[test]
    fn separation_factor_is_below_one(l in 1e-6f64..10.0) {
        let k = separation_factor(hl(l));
        prop_assert!(k > 0.0 && k < 1.0);
    }

    #[test]
    fn modulus_is_additive(r1 in 0.1f64..10.0, f1 in 1.001f64..5.0, f2 in 1.001f64..5.0) {
        let (r2, r3) = (r1 * f1, r1 * f1 * f2);
        let a = modulus(&RoundAnnulus::new(r1, r2).unwrap());
        let b = modulus(&RoundAnnulus::new(r2, r3).unwrap());
        let c = modulus(&RoundAnnulus::new(r1, r3).unwrap());
        prop_assert!((a + b - c).abs() <= 1e-13 * c.max(1.0));
    }

    #[test]
    fn log_coordinates_round_trip(f in 1.01f64..20.0, s in 0.0f64..1.0, x in 0.0f64..1.0) {
        let ann = RoundAnnulus::new(1.0, f).unwrap();
        let height = ann.log_height();
        let z = from_log_coords(height, s * height, x).unwrap();
        let (t, xx) = to_log_coords(&ann, z).unwrap();
        prop_assert!((t - s * height).abs() < 1e-12);
        let dx = (xx - x).rem_euclid(1.0);
        prop_assert!(dx.min(1.0 - dx) < 1e-12);
    }

    #[test]
    fn sector_angles_fill_the_quarter(l in 1e-4f64..5.0, t in 1e-3f64..100.0) {
        let (p, q) = grafting_sector_angles(hl(l), t).unwrap();
        prop_assert!((p.0 + q.0 - FRAC_PI_2).abs() < 1e-14);
        prop_assert!(p.0 > 0.0 && q.0 > 0.0);
    }

    #[test]
    fn standard_collar_identity(l in 1e-4f64..5.0) {
        let m = standard_collar_modulus(hl(l));
        prop_assert!((m - 2.0 * collar_angle(hl(l)).0 / l).abs() <= 1e-10 * m.max(1.0));
    }

    #[test]
    fn support_step_sandwich(
        lo_frac in 0.1f64..=1.0, hi in 1e-4f64..0.1, t in 1e-2f64..50.0,
    ) {
        let old = LengthInterval::new(lo_frac * hi, hi).unwrap();
        let s = support_step(old, t).unwrap();
        let decay = PI / (PI + t);
        prop_assert!(s.new.lo <= decay * old.lo);
        prop_assert!(decay * old.lo <= s.new.hi);
        prop_assert!(s.new.lo > 0.0);
        prop_assert!(s.new.lo <= s.new.hi);
    }

    #[test]
    fn disjoint_curves_keep_upper_and_lose_little(
        g in 1e-3f64..0.1, d_hi in 1e-3f64..0.1, d_frac in 0.2f64..=1.0, t in 0.1f64..20.0,
    ) {
        let st = short_state(&[
            ("g", CurveRole::Support, g, g),
            ("d", CurveRole::Disjoint, d_frac * d_hi, d_hi),
        ]);
        let lam = WeightedMulticurve::single("g", t).unwrap();
        let step = graft_length_bounds(&st, &lam, 1.0, 1.0).unwrap();
        let old = st.interval(&"d".into()).unwrap();
        let new = step.next.interval(&"d".into()).unwrap();
        prop_assert_eq!(new.hi, old.hi);
        prop_assert!(new.lo <= old.lo);
        prop_assert!(new.lo >= 0.5 * old.lo);
    }

    #[test]
    fn moduli_ratio_is_bounded(lp in 1e-3f64..0.1, grow in 1.0f64..3.0, r in 0.0f64..0.5) {
        let m = bounding_annulus_moduli(hl(lp), r).unwrap();
        let bound = m.ratio_bound(hl(lp * grow)).unwrap();
        prop_assert!(m.ratio() >= 1.0);
        prop_assert!(m.ratio() <= bound * (1.0 + 1e-14));
        prop_assert!(m.mod_c1 <= m.mod_c1_radius_form);
        prop_assert!(m.mod_c2 >= m.mod_c2_radius_form);
    }

    #[test]
    fn capped_containment_implies_exact(l in 1e-4f64..0.05, t in 0.5f64..30.0) {
        let c = collar_containment_check(hl(l), t, 1.0).unwrap();
        if c.capped_holds && c.radius_exact <= c.radius_cap {
            prop_assert!(c.exact_holds);
        }
    }

    #[test]
    fn iterate_upper_bounds_decay_geometrically(
        l in 1e-3f64..0.1, t in 0.5f64..20.0, n in 1usize..8,
    ) {
        let st = short_state(&[("g", CurveRole::Support, l, l)]);
        let lam = WeightedMulticurve::single("g", t).unwrap();
        let tr = iterate_grafting(&st, &lam, n, 1.0, 1.0).unwrap();
        let decay = decay_factor(t).unwrap();
        for (k, (lo, hi)) in tr.series(&"g".into()).unwrap().into_iter().enumerate() {
            let expected = l * decay.powi(k as i32);
            prop_assert!((hi - expected).abs() <= 1e-13 * expected);
            prop_assert!(lo <= hi);
        }
    }

    #[test]
    fn lift_partial_sums_increase_to_the_limit(
        l in 1e-3f64..0.1, t in 0.5f64..40.0, n in 0usize..30,
    ) {
        let r = iterated_lift_radius(hl(l), t, 1.0, n).unwrap();
        prop_assert!(r.partial_sums.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(r.partial <= r.limit * (1.0 + 1e-14));
        prop_assert!((r.limit - l.powf(0.125) * r.multiplier).abs() <= 1e-13 * r.limit);
    }

    #[test]
    fn cauchy_tails_match_closed_form(l in 1e-3f64..0.1, t in 0.5f64..20.0, n in 2usize..12) {
        let st = short_state(&[("g", CurveRole::Support, l, l)]);
        let lam = WeightedMulticurve::single("g", t).unwrap();
        let tr = iterate_grafting(&st, &lam, n, 1.0, 1.0).unwrap();
        let r = endpoint_cauchy_analysis(&tr, 1.0).unwrap();
        prop_assert!(r.summable);
        prop_assert!(r.max_tail_mismatch <= 1e-12);
        for ratio in &r.ratios {
            prop_assert!((ratio - r.q).abs() <= 1e-10);
        }
        for (s, lim) in r.tail_sums.iter().zip(&r.tail_limit) {
            prop_assert!(*s <= lim * (1.0 + 1e-14));
        }
    }

    #[test]
    fn weighted_sum_formula(s in 0.01f64..50.0, t in 0.01f64..50.0) {
        let eta = WeightedMulticurve::single("g", s).unwrap();
        let lam = WeightedMulticurve::single("g", t).unwrap();
        let w = weighted_sum(&eta, &lam).unwrap().weight(&"g".into()).unwrap();
        prop_assert!((w - (s + t + s * t / PI)).abs() <= 1e-13 * w);
    }

    #[test]
    fn twist_amount_increases(c2 in 0.5f64..50.0, a in 0.0f64..20.0, b in 0.01f64..20.0) {
        let n1 = twist_amount_bound(c2 + a, c2).unwrap();
        let n2 = twist_amount_bound(c2 + a + b, c2).unwrap();
        prop_assert!(n2 > n1);
        prop_assert!(n1 >= 2.0);
    }

    #[test]
    fn twist_dilatation_matches_its_mu(a in 0.1f64..5.0, k in -8.0f64..8.0) {
        let m = TwistMap::new(a, k).unwrap();
        let mu = m.mu(0.3 * a, 0.7).norm();
        let kk = twist_dilatation(a, k);
        prop_assert!((dilatation(mu) - kk).abs() <= 1e-12 * kk);
    }

    #[test]
    fn shear_log_form_dominates(b in 1.0f64..1.5) {
        let sb = shear_bound(b, 2.0 * std::f64::consts::SQRT_2).unwrap();
        prop_assert!(sb.dilatation >= 1.0);
        prop_assert!(sb.dilatation.ln() <= sb.log_form + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn numerical_shear_dilatation_is_below_the_bound(
        b in 1.01f64..1.5, a in 1.05f64..3.0,
    ) {
        let d = BoundaryDistortion::with_bilipschitz(b).unwrap();
        let map = ShearingMap::new(a, d).unwrap();
        let g = GridMap::sample(&map, 65, 65).unwrap();
        let est = beltrami_estimate(&g).unwrap();
        let bound = map.bound(2.0 * std::f64::consts::SQRT_2);
        prop_assert!(est.sup_k <= bound.dilatation * (1.0 + 1e-6));
    }

    #[test]
    fn composed_dilatation_is_subadditive_in_log(
        a in 0.5f64..3.0, b in 0.5f64..3.0, k in -3.0f64..3.0,
    ) {
        let scale = ScalingMap::new(a, b).unwrap();
        let twist = TwistMap::new(a, k).unwrap();
        let comp = Composed::new(scale, twist).unwrap();
        let g = GridMap::sample(&comp, 65, 65).unwrap();
        let est = beltrami_estimate(&g).unwrap();
        let budget = (a / b).max(b / a).ln() + twist_dilatation(a, k).ln();
        prop_assert!(est.sup_k.ln() <= budget + 1e-3);
        prop_assert_eq!(comp.eval(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn identity_on_the_unit_collar() {
    let st = short_state(&[("g", CurveRole::Support, 0.05, 0.05)]);
    let lam = WeightedMulticurve::single("g", TAU).unwrap();
    let tr = iterate_grafting(&st, &lam, 0, 1.0, 1.0).unwrap();
    assert_eq!(tr.last(), &st);
}
