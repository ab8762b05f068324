use std::f64::consts::TAU;

use selflink::bundles::Bundle;
use selflink::curves::TrigPoly;
use selflink::linking::{
    linking_condition_margin, linking_number_integral_with, self_integrand, IntegralOptions,
    CONDITION_FLOOR,
};
use selflink::numerics::RootOptions;
use selflink::selflinking::{
    diagonal_phi, orthogonal_developable_intersections, osculating_developable_intersections,
    pushoff, sl_integral, sl_integral_even, sl_limit, SelfLinkOptions,
};
use selflink::{frenet, Error, TrigCurve, Vector};

fn ellipse() -> TrigCurve {
    TrigCurve::new(vec![
        TrigPoly::default().with_term(1, 2.0, 0.0),
        TrigPoly::default().with_term(1, 0.0, 1.0),
        TrigPoly::constant(0.0),
    ])
    .unwrap()
}

/// A closed space curve with nonvanishing curvature and torsion of both signs.
fn saddle() -> TrigCurve {
    TrigCurve::new(vec![
        TrigPoly::default().with_term(1, 1.0, 0.0),
        TrigPoly::default().with_term(1, 0.0, 1.0),
        TrigPoly::default().with_term(2, 0.0, 0.3),
    ])
    .unwrap()
}

fn opts(grid: usize, k: usize) -> SelfLinkOptions {
    SelfLinkOptions {
        k: Some(k),
        integral: IntegralOptions::nested(grid),
        ..SelfLinkOptions::default()
    }
}

#[test]
fn pushoff_of_the_unit_circle() {
    let c = TrigCurve::circle(1.0, [0.0; 3]);
    let p = pushoff(&c, 1, 0.1).unwrap();
    for t in [0.0f64, 0.4, 2.2, 5.0] {
        let expect = Vector::from_vec(vec![t.cos() - 0.1 * t.sin(), t.sin() + 0.1 * t.cos(), 0.0]);
        assert!((p.eval(t) - expect).norm() < 1e-15);
    }
    assert!(matches!(
        pushoff(&c, 1, 0.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn small_pushoff_keeps_the_chord_condition() {
    let c = TrigCurve::example1(1.0);
    let moved = pushoff(&c, 2, 1e-3).unwrap();
    let (margin, _) = linking_condition_margin(&moved, &c, &Bundle::orthogonal(&c), 256).unwrap();
    assert!(margin > CONDITION_FLOOR, "{margin}");
}

#[test]
fn planar_convex_curve_does_not_self_link() {
    let c = ellipse();
    let b = Bundle::coordinate(3);
    let r = sl_integral(&c, &b, 1, &opts(256, 1)).unwrap();
    assert_eq!(r.value, 0);
    assert!(r.residual < 1e-3);
    // every determinant column lies in the plane
    assert!(r.raw.abs() < 1e-12, "{}", r.raw);
    assert_eq!(sl_limit(&c, &b, 1, &opts(256, 1)).unwrap().value, 0);
}

#[test]
fn constant_bundle_form_is_minus_torsion() {
    let c = saddle();
    let b = Bundle::coordinate(3);
    for i in 0..32 {
        let t = TAU * i as f64 / 32.0;
        let j = c.eval_jet(t, 3);
        let (d1, d2, d3) = (j.d(1), j.d(2), j.d(3));
        let cross = |u: &Vector, v: &Vector| {
            Vector::from_vec(vec![
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ])
        };
        let w = cross(d1, d2);
        let torsion = w.dot(d3) / w.norm_squared();
        let phi = diagonal_phi(&c, &b, 1, t).unwrap();
        assert!(
            (phi + torsion * d1.norm()).abs() < 1e-8,
            "t = {t}: {phi} vs {torsion}"
        );
    }
}

#[test]
fn space_curve_integral_agrees_with_the_limit() {
    let c = saddle();
    let b = Bundle::coordinate(3);
    let i = sl_integral(&c, &b, 1, &opts(256, 1)).unwrap();
    let l = sl_limit(&c, &b, 1, &opts(256, 1)).unwrap();
    assert_eq!(i.value, l.value);
    assert!(i.residual < 1e-3);
}

#[test]
fn integrand_is_continuous_across_the_diagonal() {
    for c in [TrigCurve::example1(1.0), TrigCurve::example2(1.6)] {
        for b in [Bundle::osculating(&c), Bundle::orthogonal(&c)] {
            for &t in &[0.3, 2.9, 4.4] {
                let gap = |e: f64| {
                    (self_integrand(&c, &b, t, e).unwrap() - self_integrand(&c, &b, t, -e).unwrap())
                        .abs()
                };
                let (g3, g4) = (gap(1e-3), gap(1e-4));
                // the two one-sided values meet linearly in the offset
                assert!(g4 < 0.2 * g3 + 1e-9, "{} t = {t}: {g3:e} {g4:e}", b.label());
            }
        }
    }
}

#[test]
fn developable_roots_avoid_the_diagonal() {
    let c = TrigCurve::example1(1.0);
    let (perp, _) = osculating_developable_intersections(&c, &RootOptions::default()).unwrap();
    let (top, _) = orthogonal_developable_intersections(&c, &RootOptions::default()).unwrap();
    for r in perp.iter().chain(&top) {
        let d = (r.s - r.t).rem_euclid(TAU);
        assert!(d.min(TAU - d) > 1e-3);
        assert!(r.contribution.abs() == 0.5);
    }
    // the last ruling coordinate cannot vanish on the flag hypersurface
    for r in &perp {
        assert!(r.fiber_coords.last().unwrap().abs() > 1e-6);
    }
}

#[test]
fn reversal_keeps_the_osculating_number_and_flips_the_orthogonal_one() {
    for c in [
        TrigCurve::example1(1.0),
        TrigCurve::example1(1.3),
        TrigCurve::example2(1.6),
    ] {
        let r = c.reversed();
        let o = RootOptions::default();
        let (top, top_v) = orthogonal_developable_intersections(&c, &o).unwrap();
        let (top_r, top_rv) = orthogonal_developable_intersections(&r, &o).unwrap();
        assert_eq!(top.len(), top_r.len());
        assert_eq!(top_v.value, top_rv.value);
        let (perp, perp_v) = osculating_developable_intersections(&c, &o).unwrap();
        let (perp_r, perp_rv) = osculating_developable_intersections(&r, &o).unwrap();
        assert_eq!(perp.len(), perp_r.len());
        // even dimension: reversing t reverses the orthogonal bundle's orientation
        assert_eq!(perp_v.value, -perp_rv.value);
    }
}

#[test]
fn limit_is_stable_under_smaller_pushoffs() {
    let cases = [
        (TrigCurve::example1(1.0), true, 1),
        (TrigCurve::example2(1.6), false, 2),
    ];
    for (c, osculating, k) in cases {
        let b = if osculating {
            Bundle::osculating(&c)
        } else {
            Bundle::orthogonal(&c)
        };
        let o = opts(256, k);
        let r = sl_limit(&c, &b, k, &o).unwrap();
        let delta = r.diagnostics.pushoffs[0].0;
        let quarter = linking_number_integral_with(
            &pushoff(&c, k, delta / 4.0).unwrap(),
            &c,
            &b,
            &o.integral,
        )
        .unwrap();
        assert_eq!(quarter.value, r.value);
    }
}

#[test]
fn regularity_failure_names_the_parameter() {
    let c = TrigCurve::circle(1.0, [0.0; 3]).embedded(4).unwrap();
    let e = sl_integral_even(&c, &Bundle::orthogonal(&c), 2, &opts(64, 2)).unwrap_err();
    let text = e.to_string();
    assert!(text.contains("t ="), "{text}");
}

#[test]
fn parity_is_checked() {
    let c = TrigCurve::example1(1.0);
    let e = sl_integral_even(&c, &Bundle::osculating(&c), 1, &opts(64, 1)).unwrap_err();
    assert!(matches!(e, Error::InvalidArgument(_)));
}

#[test]
fn osculating_form_is_minus_second_curvature() {
    let c = TrigCurve::example2(1.6);
    let b = Bundle::osculating(&c);
    for i in 0..64 {
        let t = TAU * (i as f64 + 0.5) / 64.0;
        let app = frenet(&c, t).unwrap();
        let phi = diagonal_phi(&c, &b, 1, t).unwrap();
        assert!((phi + app.kappa(2) * app.speed).abs() < 1e-6);
    }
}
