use selflink::bundles::Bundle;
use selflink::curves::TrigPoly;
use selflink::linking::{
    gauss_linking_r3, linking_condition_margin, linking_number_integral,
    linking_number_intersection, Method,
};
use selflink::numerics::{RootOptions, TorusGrid};
use selflink::{frenet, Error, TrigCurve};

fn hopf_pair() -> (TrigCurve, TrigCurve) {
    let a = TrigCurve::circle(1.0, [0.0, 0.0, 0.0]);
    // unit circle in the xz-plane through the center of the first
    let b = TrigCurve::new(vec![
        TrigPoly::constant(1.0).with_term(1, 1.0, 0.0),
        TrigPoly::constant(0.0),
        TrigPoly::default().with_term(1, 0.0, 1.0),
    ])
    .unwrap();
    (a, b)
}

/// A small circle around `α(t0)` in the plane of `f_i(t0), f_j(t0)`.
fn meridian(curve: &TrigCurve, t0: f64, (i, j): (usize, usize), r: f64) -> TrigCurve {
    let app = frenet(curve, t0).unwrap();
    let p = curve.eval(t0);
    let coords = (0..curve.dim())
        .map(|d| TrigPoly::constant(p[d]).with_term(1, r * app.f(i)[d], r * app.f(j)[d]))
        .collect();
    TrigCurve::new(coords).unwrap()
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

// Golden: with α counterclockwise in the xy-plane and β through its center
// in the xz-plane, the pair links with this sign. Changing it means the
// integrand or its orientation changed.
#[test]
fn hopf_golden_sign() {
    let (a, b) = hopf_pair();
    let r = linking_number_integral(&a, &b, &Bundle::coordinate(3), grid(256)).unwrap();
    assert_eq!(r.value, -1);
    assert!(r.residual < 1e-3, "{}", r.residual);
    let g = gauss_linking_r3(&a, &b, grid(256)).unwrap();
    assert_eq!(g.value, r.value);
    assert!((g.raw - r.raw).abs() < 1e-10);
}

#[test]
fn hopf_sign_flips_with_either_orientation() {
    let (a, b) = hopf_pair();
    let bundle = Bundle::coordinate(3);
    let forward = linking_number_integral(&a, &b, &bundle, grid(128))
        .unwrap()
        .value;
    let back = linking_number_integral(&a, &b.reversed(), &bundle, grid(128))
        .unwrap()
        .value;
    assert_eq!(back, -forward);
    let swapped = linking_number_integral(&b, &a, &bundle, grid(128))
        .unwrap()
        .value;
    assert_eq!(swapped, forward);
}

#[test]
fn distant_circles_do_not_link() {
    let a = TrigCurve::circle(1.0, [0.0, 0.0, 0.0]);
    let b = TrigCurve::circle(0.7, [5.0, -1.0, 0.5]);
    let r = linking_number_integral(&a, &b, &Bundle::coordinate(3), grid(256)).unwrap();
    assert_eq!(r.value, 0);
    assert!(r.residual < 1e-3);
    let x = linking_number_intersection(
        &a,
        &b,
        &Bundle::coordinate(3),
        None,
        &RootOptions::default(),
    )
    .unwrap();
    assert_eq!(x.value, 0);
    assert!(x.diagnostics.intersections.is_empty());
}

#[test]
fn intersection_count_matches_integral_on_the_hopf_pair() {
    let (a, b) = hopf_pair();
    let x = linking_number_intersection(
        &a,
        &b,
        &Bundle::coordinate(3),
        None,
        &RootOptions::default(),
    )
    .unwrap();
    assert_eq!(x.method, Method::Intersection);
    assert_eq!(x.value, -1);
    let total: f64 = x
        .diagnostics
        .intersections
        .iter()
        .map(|r| r.contribution)
        .sum();
    assert_eq!(total, -1.0);
}

#[test]
fn meridian_of_a_four_dimensional_curve() {
    let a = TrigCurve::example1(1.0);
    let b = meridian(&a, 0.7, (2, 3), 0.2);
    for (bundle, expected) in [(Bundle::osculating(&a), 1), (Bundle::coordinate(4), -1)] {
        let i = linking_number_integral(&a, &b, &bundle, grid(256)).unwrap();
        let x =
            linking_number_intersection(&a, &b, &bundle, None, &RootOptions::default()).unwrap();
        assert_eq!(
            (i.value, x.value),
            (expected, expected),
            "{}",
            bundle.label()
        );
    }
}

#[test]
fn chord_in_the_complement_is_refused_by_both_methods() {
    // the meridian in the f3, f4 plane meets the osculating fibers' complement
    let a = TrigCurve::example1(1.0);
    let b = meridian(&a, 0.7, (3, 4), 0.2);
    let bundle = Bundle::osculating(&a);
    let (margin, _) = linking_condition_margin(&a, &b, &bundle, 256).unwrap();
    assert!(margin < 1e-9);
    let e = linking_number_integral(&a, &b, &bundle, grid(128)).unwrap_err();
    assert!(matches!(e, Error::FiberOrthogonal { .. }), "{e}");
    let e =
        linking_number_intersection(&a, &b, &bundle, None, &RootOptions::default()).unwrap_err();
    assert!(matches!(e, Error::FiberOrthogonal { .. }), "{e}");
}

#[test]
fn touching_curves_are_named() {
    let a = TrigCurve::circle(1.0, [0.0, 0.0, 0.0]);
    let b = TrigCurve::circle(1.0, [2.0, 0.0, 0.0]);
    let e = gauss_linking_r3(&a, &b, grid(64)).unwrap_err();
    assert!(matches!(e, Error::CurvesIntersect { .. }), "{e}");
}

#[test]
fn mismatched_dimensions() {
    let a = TrigCurve::circle(1.0, [0.0; 3]);
    let b = TrigCurve::example1(1.0);
    let e = linking_number_integral(&a, &b, &Bundle::coordinate(3), grid(64)).unwrap_err();
    assert!(matches!(e, Error::DimensionMismatch { .. }), "{e}");
}
