//! Self-linking numbers: the push-off limit, the integral formulas for even
//! and odd push-off order, and intersection counts with the two
//! developable hypersurfaces swept by Frenet flags.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::bundles::{check_sl_conditions, Bundle, RegularityReport};
use crate::curves::{arclength_jet, TrigCurve};
use crate::error::{Error, Result};
use crate::frames::{det_columns, fiber_cross, frenet, partial_frenet};
use crate::linking::{
    linking_condition_margin, linking_number_integral_with, self_integrand, Diagnostics,
    IntegralOptions, InvariantResult, Method, CONDITION_FLOOR, MAX_RESIDUAL,
};
use crate::numerics::{
    adaptive_integral, circle_integral, diagonal_factor, find_roots_stable, AdaptiveOptions,
    RootOptions, RootProblem, SecondAxis,
};
use crate::Vector;

/// A transverse intersection of the curve with a developable hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    pub t: f64,
    pub s: f64,
    /// Coordinates of the hit point along the ruling directions at `t`.
    pub fiber_coords: Vec<f64>,
    pub sign_factor: i32,
    /// Intersection index, when the count uses one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<i32>,
    /// `±½`; the invariant is the sum.
    pub contribution: f64,
    pub jacobian_det: f64,
    pub residual: f64,
}

/// One value of the diagonal boundary form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFormSample {
    pub t: f64,
    pub phi: f64,
}

/// Settings shared by the self-linking computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfLinkOptions {
    /// Push-off order; detected from the regularity conditions when absent.
    pub k: Option<usize>,
    pub integral: IntegralOptions,
    /// Grid for the regularity checks.
    pub condition_grid: usize,
    pub roots: RootOptions,
    /// Allowed gap between the primary and cross-check raw values.
    pub cross_check_tol: f64,
    /// Candidate push-off sizes, largest first.
    pub limit_deltas: Vec<f64>,
}

impl Default for SelfLinkOptions {
    fn default() -> Self {
        SelfLinkOptions {
            k: None,
            integral: IntegralOptions::nested(512),
            condition_grid: 256,
            roots: RootOptions::default(),
            cross_check_tol: 2e-3,
            limit_deltas: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
        }
    }
}

/// `α + δ α^(k)`, again a trigonometric curve.
pub fn pushoff(curve: &TrigCurve, k: usize, delta: f64) -> Result<TrigCurve> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "push-off size must be finite and nonzero, got {delta}"
        )));
    }
    curve.add(&curve.derivative_curve(k as u32).scaled(delta))
}

/// Smallest order `k` for which the regularity conditions hold.
pub fn detect_order(curve: &TrigCurve, bundle: &Bundle, grid: usize) -> Result<usize> {
    let mut last = None;
    for k in 1..=curve.dim() - 2 {
        let report = check_sl_conditions(curve, bundle, k, grid)?;
        if report.pass {
            return Ok(k);
        }
        last = Some(report);
    }
    match last {
        Some(r) => r.into_result().map(|r| r.k),
        None => Err(Error::Dimension(curve.dim())),
    }
}

/// `opts.k`, or the detected order.
pub fn resolve_order(curve: &TrigCurve, bundle: &Bundle, opts: &SelfLinkOptions) -> Result<usize> {
    match opts.k {
        Some(k) => Ok(k),
        None => detect_order(curve, bundle, 512),
    }
}

fn require_conditions(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    grid: usize,
) -> Result<RegularityReport> {
    if curve.dim() != bundle.dim() {
        return Err(Error::DimensionMismatch {
            expected: bundle.dim(),
            got: curve.dim(),
        });
    }
    check_sl_conditions(curve, bundle, k, grid)?.into_result()
}

/// The self-linking number as the linking number with a small push-off
/// along `α^(k)`, taken at two push-off sizes that must agree.
pub fn sl_limit(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    opts: &SelfLinkOptions,
) -> Result<InvariantResult> {
    let report = require_conditions(curve, bundle, k, opts.condition_grid)?;
    let integral = opts.integral.resolved(curve, curve, bundle)?;

    // Try push-offs from the largest down. A size is accepted once it and its
    // half both keep the chord condition and round to the same integer.
    let clear = |d: f64| -> Result<bool> {
        let moved = pushoff(curve, k, d)?;
        let (margin, _) = linking_condition_margin(&moved, curve, bundle, opts.condition_grid)?;
        Ok(margin > CONDITION_FLOOR)
    };
    let run = |d: f64| -> Result<InvariantResult> {
        let moved = pushoff(curve, k, d)?;
        linking_number_integral_with(
            &moved,
            curve,
            bundle,
            &IntegralOptions {
                max_residual: 0.5,
                // near-diagonal features shrink like the square of the push-off
                inner: AdaptiveOptions {
                    diagonal_grading: 0.1 * d * d,
                    ..integral.inner
                },
                ..integral.clone()
            },
        )
    };
    let mut mismatch = None;
    let mut accepted = None;
    for &delta in &opts.limit_deltas {
        if !(clear(delta)? && clear(0.5 * delta)?) {
            // the margin only shrinks with the push-off
            break;
        }
        let (ra, rb) = (run(delta)?, run(0.5 * delta)?);
        if ra.value == rb.value && rb.residual < opts.integral.max_residual {
            accepted = Some([(delta, ra), (0.5 * delta, rb)]);
            break;
        }
        mismatch = Some(Error::UnstableLimit {
            delta_a: delta,
            raw_a: ra.raw,
            delta_b: 0.5 * delta,
            raw_b: rb.raw,
        });
    }
    let Some(runs) = accepted else {
        return Err(mismatch.unwrap_or_else(|| {
            Error::Conditions("no push-off size keeps the chord condition".into())
        }));
    };
    let rb = &runs[1].1;
    let diagnostics = Diagnostics {
        grid: Some(integral.grid),
        quadrature: rb.diagnostics.quadrature,
        condition_margin: Some(report.condition1_margin),
        condition_location: Some(report.condition1_location),
        pushoffs: runs.iter().map(|(d, r)| (*d, r.raw)).collect(),
        bumps: integral.bumps.clone(),
        ..Diagnostics::default()
    };
    InvariantResult::round(
        rb.raw,
        Method::Limit,
        diagnostics,
        opts.integral.max_residual,
    )
}

fn self_integral(
    curve: &TrigCurve,
    bundle: &Bundle,
    opts: &IntegralOptions,
) -> Result<(f64, IntegralOptions, crate::numerics::Quadrature)> {
    let opts = opts.resolved(curve, curve, bundle)?;
    let q = opts.integrate(|t, _, h| self_integrand(curve, bundle, t, h))?;
    Ok((q.value / (4.0 * PI), opts, q))
}

fn integral_result(
    raw: f64,
    report: &RegularityReport,
    opts: &IntegralOptions,
    q: crate::numerics::Quadrature,
    diagonal_term: Option<f64>,
) -> Diagnostics {
    Diagnostics {
        grid: Some(opts.grid),
        quadrature: Some(q),
        condition_margin: Some(report.condition1_margin),
        condition_location: Some(report.condition1_location),
        diagonal_term,
        bumps: opts.bumps.clone(),
        notes: if raw.is_finite() {
            Vec::new()
        } else {
            vec!["non-finite raw value".into()]
        },
        ..Diagnostics::default()
    }
}

/// Self-linking number for even `k`: the linking integral of the curve with
/// itself over the whole torus.
pub fn sl_integral_even(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    opts: &SelfLinkOptions,
) -> Result<InvariantResult> {
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("order {k} is odd")));
    }
    let report = require_conditions(curve, bundle, k, opts.condition_grid)?;
    let (raw, used, q) = self_integral(curve, bundle, &opts.integral)?;
    let diagnostics = integral_result(raw, &report, &used, q, None);
    InvariantResult::round(raw, Method::Integral, diagnostics, used.max_residual)
}

/// Self-linking number for odd `k`: the torus integral minus the boundary
/// term `(1/2π) ∫ φ` along the diagonal.
pub fn sl_integral_odd(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    opts: &SelfLinkOptions,
) -> Result<InvariantResult> {
    if k % 2 != 1 {
        return Err(Error::InvalidArgument(format!("order {k} is even")));
    }
    let report = require_conditions(curve, bundle, k, opts.condition_grid)?;
    let (area, used, q) = self_integral(curve, bundle, &opts.integral)?;
    // φ can have sharp features where curvatures nearly vanish; it is a
    // cheap one-dimensional integral, so resolve it fully
    let boundary = adaptive_integral(
        |t| diagonal_phi(curve, bundle, k, t),
        0.0,
        TAU,
        AdaptiveOptions::default(),
    )?
    .value
        / TAU;
    let raw = area - boundary;
    let diagnostics = integral_result(raw, &report, &used, q, Some(boundary));
    InvariantResult::round(raw, Method::Integral, diagnostics, used.max_residual)
}

/// Integral formula for either parity of `k`.
pub fn sl_integral(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    opts: &SelfLinkOptions,
) -> Result<InvariantResult> {
    if k.is_multiple_of(2) {
        sl_integral_even(curve, bundle, k, opts)
    } else {
        sl_integral_odd(curve, bundle, k, opts)
    }
}

/// Step for the central differences in [`diagonal_phi`].
pub const PHI_FD_STEP: f64 = 1e-3;

fn diagonal_normal(curve: &TrigCurve, bundle: &Bundle, k: usize, t: f64) -> Result<Vector> {
    let frame = bundle.frame(t)?;
    let jet = curve.eval_jet(t, k + 1);
    let g = fiber_cross(&frame, jet.d(k + 1), jet.d(k));
    let norm = g.norm();
    if norm < 1e-12 * jet.d(k).norm() * jet.d(k + 1).norm() {
        return Err(Error::DiagonalDegeneracy { t });
    }
    Ok(g / norm)
}

/// Coefficient of `dt` in the boundary form along the diagonal, for odd `k`.
///
/// `g` is the unit fiber cross product of `α^(k+1)` and `α^(k)`, `u` the
/// unit fiber component of `α^(k)` and `h = g × u`; the value is
/// `⟨g′ + A_t g, h⟩` with `g′` from a sixth-order central difference.
pub fn diagonal_phi(curve: &TrigCurve, bundle: &Bundle, k: usize, t: f64) -> Result<f64> {
    if k % 2 != 1 {
        return Err(Error::InvalidArgument(format!("order {k} is even")));
    }
    let fiber = bundle.fiber(t)?;
    let g = diagonal_normal(curve, bundle, k, t)?;
    let u = fiber.frame.project(&curve.derivative_at(t, k));
    let un = u.norm();
    if un == 0.0 {
        return Err(Error::DiagonalDegeneracy { t });
    }
    let h = fiber_cross(&fiber.frame, &g, &(u / un));
    let e = PHI_FD_STEP;
    let at = |j: f64| diagonal_normal(curve, bundle, k, t + j * e);
    let dg = ((at(3.0)? - at(-3.0)?) - (at(2.0)? - at(-2.0)?) * 9.0
        + (at(1.0)? - at(-1.0)?) * 45.0)
        / (60.0 * e);
    Ok((dg + fiber.a_apply(&g)).dot(&h))
}

/// [`diagonal_phi`] on `n` uniform nodes.
pub fn diagonal_phi_samples(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    n: usize,
) -> Result<Vec<DiagonalFormSample>> {
    (0..n)
        .map(|i| {
            let t = i as f64 * TAU / n as f64;
            diagonal_phi(curve, bundle, k, t).map(|phi| DiagonalFormSample { t, phi })
        })
        .collect()
}

fn cross_checked(
    mut primary: InvariantResult,
    secondary: f64,
    tolerance: f64,
) -> Result<InvariantResult> {
    if (primary.raw - secondary).abs() > tolerance {
        return Err(Error::CrossValidation {
            primary: primary.raw,
            secondary,
            tolerance,
        });
    }
    primary.diagnostics.cross_check = Some(secondary);
    Ok(primary)
}

/// Self-linking number of the orthogonal bundle by the integral formula,
/// checked against the curvature form of its integrand in arc length.
pub fn sl_orthogonal(curve: &TrigCurve, opts: &SelfLinkOptions) -> Result<InvariantResult> {
    let n = curve.dim();
    let bundle = Bundle::orthogonal(curve);
    let k = n - 2;
    let primary = sl_integral(curve, &bundle, k, opts)?;
    let used = IntegralOptions {
        bumps: primary.diagnostics.bumps.clone(),
        ..opts.integral.clone()
    };
    let q = used.integrate(|t, s, h| {
        let app = frenet(curve, t)?;
        let fiber = bundle.fiber(t)?;
        let delta = curve.chord_jet(t, -h, 0).values.swap_remove(0);
        let c = fiber.coords(&delta);
        let norm = c.norm();
        if norm == 0.0 {
            return Err(Error::FiberOrthogonal { t, s, norm });
        }
        let tangent = arclength_jet(curve, s, 1)?;
        let e1 = nalgebra::Vector3::new(1.0, 0.0, 0.0);
        let shear = if n > 3 {
            delta.dot(app.f(n - 3)) * app.kappa(n - 3)
        } else {
            0.0
        };
        let m = nalgebra::Matrix3::from_columns(&[c, fiber.coords(tangent.d(1)), e1]);
        // dσ_t dσ_s in the parameter of the curve
        Ok(shear * m.determinant() / (norm * norm * norm)
            * app.speed
            * curve.derivative_at(s, 1).norm())
    })?;
    let mut secondary = q.value / (4.0 * PI);
    if k % 2 == 1 {
        secondary += circle_integral(
            |t| {
                let app = frenet(curve, t)?;
                Ok(app.kappa(n - 1) * app.speed)
            },
            used.grid,
        )? / TAU;
    }
    cross_checked(primary, secondary, opts.cross_check_tol)
}

/// Self-linking number of the osculating bundle by the integral formula,
/// checked against the curvature form of its integrand in arc length.
pub fn sl_osculating(curve: &TrigCurve, opts: &SelfLinkOptions) -> Result<InvariantResult> {
    let bundle = Bundle::osculating(curve);
    let primary = sl_integral_odd(curve, &bundle, 1, opts)?;
    let used = IntegralOptions {
        bumps: primary.diagnostics.bumps.clone(),
        ..opts.integral.clone()
    };
    let q = used.integrate(|t, s, h| {
        let app = partial_frenet(curve, t, 3)?;
        let frame = crate::frames::Frame3::orthonormalize(app.f(1), app.f(2), app.f(3))?;
        let delta = curve.chord_jet(t, -h, 0).values.swap_remove(0);
        let c = frame.coords(&delta);
        let norm = c.norm();
        if norm == 0.0 {
            return Err(Error::FiberOrthogonal { t, s, norm });
        }
        let unit_t = arclength_jet(curve, t, 4)?;
        let unit_s = arclength_jet(curve, s, 1)?;
        let fourth = unit_t.d(4) - frame.project(unit_t.d(4));
        let twist = delta.dot(&fourth) / (app.kappa(1) * app.kappa(2));
        let last = frame.coords(&(unit_t.d(1) - app.f(3) * twist));
        let m = nalgebra::Matrix3::from_columns(&[c, frame.coords(unit_s.d(1)), last]);
        Ok(m.determinant() / (norm * norm * norm) * app.speed * curve.derivative_at(s, 1).norm())
    })?;
    let torsion = circle_integral(
        |t| {
            let app = partial_frenet(curve, t, 3)?;
            Ok(app.kappa(2) * app.speed)
        },
        used.grid,
    )? / TAU;
    cross_checked(
        primary,
        q.value / (4.0 * PI) + torsion,
        opts.cross_check_tol,
    )
}

fn intersection_result(records: Vec<IntersectionRecord>, seeds: usize) -> Result<InvariantResult> {
    let raw: f64 = records.iter().map(|r| r.contribution).sum();
    let diagnostics = Diagnostics {
        seeds: Some(seeds),
        intersections: records,
        ..Diagnostics::default()
    };
    InvariantResult::round(raw, Method::Intersection, diagnostics, MAX_RESIDUAL)
}

fn developable_roots(
    curve: &TrigCurve,
    normals: (usize, usize),
    opts: &RootOptions,
) -> Result<crate::numerics::RootScan> {
    let (p, q) = normals;
    let n = curve.dim();
    // the chord meets f_j to order j at the diagonal; dividing by the
    // matching power of 2 sin(d/2) removes that root curve
    let system = |u: &[f64]| -> Result<Vec<f64>> {
        let (t, d) = (u[0], u[1]);
        let app = if q == n {
            frenet(curve, t)?
        } else {
            partial_frenet(curve, t, q)?
        };
        let delta = curve.eval(t + d) - curve.eval(t);
        let w = diagonal_factor(t, t + d);
        Ok(vec![
            delta.dot(app.f(p)) / w.powi(p as i32),
            delta.dot(app.f(q)) / w.powi(q as i32),
        ])
    };
    let opts = RootOptions {
        second_axis: SecondAxis::OffDiagonal,
        discard_diagonal: true,
        ..*opts
    };
    find_roots_stable(
        &RootProblem {
            dim: 2,
            system: &system,
            extra: None,
        },
        &opts,
    )
}

/// Points where the curve crosses the hypersurface swept by its osculating
/// `(n−2)`-planes; half the signed count is the orthogonal self-linking
/// number.
pub fn osculating_developable_intersections(
    curve: &TrigCurve,
    opts: &RootOptions,
) -> Result<(Vec<IntersectionRecord>, InvariantResult)> {
    let n = curve.dim();
    let scan = developable_roots(curve, (n - 1, n), opts)?;
    let orient = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut records = Vec::new();
    for root in &scan.roots {
        let (t, s) = (root.t(), root.s());
        let app = frenet(curve, t)?;
        let delta = curve.eval(s) - curve.eval(t);
        let coords: Vec<f64> = (1..=n - 2).map(|i| delta.dot(app.f(i))).collect();
        let last = coords[n - 3];
        if last.abs() < 1e-9 * delta.norm() {
            return Err(Error::SingularLocus {
                t,
                s,
                coordinate: last,
            });
        }
        let third = app.f(n) * orient;
        let sign = if curve.derivative_at(s, 1).dot(&third) > 0.0 {
            -1
        } else {
            1
        };
        records.push(IntersectionRecord {
            t,
            s,
            fiber_coords: coords,
            sign_factor: sign,
            index: None,
            contribution: 0.5 * sign as f64,
            jacobian_det: root.jacobian_det,
            residual: root.residual,
        });
    }
    let result = intersection_result(records.clone(), scan.seeds)?;
    Ok((records, result))
}

/// Points where the curve crosses the hypersurface swept by its normal
/// `(n−2)`-planes; half the sum of `sgn(x₃)` times the intersection index
/// is the osculating self-linking number.
pub fn orthogonal_developable_intersections(
    curve: &TrigCurve,
    opts: &RootOptions,
) -> Result<(Vec<IntersectionRecord>, InvariantResult)> {
    let n = curve.dim();
    let scan = developable_roots(curve, (1, 2), opts)?;
    let mut records = Vec::new();
    for root in &scan.roots {
        let (t, s) = (root.t(), root.s());
        let app = frenet(curve, t)?;
        let delta = curve.eval(s) - curve.eval(t);
        let coords: Vec<f64> = (3..=n).map(|i| delta.dot(app.f(i))).collect();
        if coords[0].abs() < 1e-9 * delta.norm() {
            return Err(Error::SingularLocus {
                t,
                s,
                coordinate: coords[0],
            });
        }
        let mut sweep = curve.derivative_at(t, 1);
        for (x, i) in coords.iter().zip(3..=n) {
            sweep += app.derivative(i) * *x;
        }
        let tangent = curve.derivative_at(s, 1);
        let mut cols: Vec<&Vector> = vec![&tangent, &sweep];
        cols.extend((3..=n).map(|i| app.f(i)));
        let index = if det_columns(&cols) > 0.0 { 1 } else { -1 };
        let sign = if coords[0] > 0.0 { 1 } else { -1 };
        records.push(IntersectionRecord {
            t,
            s,
            fiber_coords: coords,
            sign_factor: sign,
            index: Some(index),
            contribution: 0.5 * (sign * index) as f64,
            jacobian_det: root.jacobian_det,
            residual: root.residual,
        });
    }
    let result = intersection_result(records.clone(), scan.seeds)?;
    Ok((records, result))
}
