//! Linking number of two closed curves through a bundle over the first.
//!
//! The integrand is the pullback of the sphere's area form under the unit
//! fiber component of the chord `β(s) − α(t)`, written in coordinates of
//! the bundle frame at `t`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bundles::{refine_minimum, Bundle, Fiber, SECTION_FD_STEP};
use crate::curves::TrigCurve;
use crate::error::{Error, Result};
use crate::numerics::{
    find_roots_stable, nearest_integer, nested_torus_integral, torus_integral, AdaptiveOptions,
    Bump, PeriodicRule, Quadrature, RootOptions, RootProblem, RootRecord, TorusGrid,
};
use crate::selflinking::IntersectionRecord;
use crate::Vector;

/// Largest accepted distance from the nearest integer.
pub const MAX_RESIDUAL: f64 = 0.05;

/// Resolution and threshold used by [`peak_bumps`] for automatic clustering.
pub const PEAK_SCAN: usize = 256;
pub const PEAK_RATIO: f64 = 0.2;

/// Smallest accepted fiber component of a chord.
pub const CONDITION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Integral,
    Intersection,
    Limit,
    GaussR3,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Integral => "integral",
            Method::Intersection => "intersection",
            Method::Limit => "limit",
            Method::GaussR3 => "gauss_r3",
        }
    }
}

/// Everything that went into a value, for reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Quadrature>,
    /// Smallest fiber component of a chord and where it occurs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_location: Option<(f64, f64)>,
    /// Boundary term `(1/2π) ∫ φ` subtracted for odd orders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal_term: Option<f64>,
    /// Raw value of an independent evaluation of the same quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<RootRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intersections: Vec<IntersectionRecord>,
    /// Push-off sizes and the raw linking numbers they gave.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pushoffs: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<Bump>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// An integer invariant with the raw number it was rounded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub raw: f64,
    pub value: i64,
    pub residual: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl InvariantResult {
    /// Rounds `raw`, refusing when it is farther than `max_residual` from
    /// every integer.
    pub fn round(
        raw: f64,
        method: Method,
        diagnostics: Diagnostics,
        max_residual: f64,
    ) -> Result<InvariantResult> {
        if !raw.is_finite() {
            return Err(Error::ResidualTooLarge {
                raw,
                residual: f64::INFINITY,
            });
        }
        let (value, residual) = nearest_integer(raw);
        if residual >= max_residual {
            return Err(Error::ResidualTooLarge { raw, residual });
        }
        Ok(InvariantResult {
            raw,
            value,
            residual,
            method,
            diagnostics,
        })
    }
}

/// How the torus integral is discretized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    /// Outer nodes (and inner nodes per axis for the midpoint rule).
    pub grid: usize,
    /// Adaptive inner integration in `t` instead of the plain midpoint rule.
    pub nested: bool,
    pub inner: AdaptiveOptions,
    /// Extra outer-node density, only used by the nested scheme.
    pub bumps: Vec<Bump>,
    /// Place bumps with [`peak_bumps`] when none are given.
    pub cluster: bool,
    pub max_residual: f64,
}

impl IntegralOptions {
    pub fn midpoint(grid: usize) -> IntegralOptions {
        IntegralOptions {
            grid,
            nested: false,
            inner: AdaptiveOptions::default(),
            bumps: Vec::new(),
            cluster: false,
            max_residual: MAX_RESIDUAL,
        }
    }

    /// Adaptive inner rule and automatically clustered outer nodes.
    pub fn nested(grid: usize) -> IntegralOptions {
        IntegralOptions {
            nested: true,
            cluster: true,
            ..IntegralOptions::midpoint(grid)
        }
    }

    /// Fills in bumps for the pair when clustering is requested.
    pub(crate) fn resolved(
        &self,
        alpha: &TrigCurve,
        beta: &TrigCurve,
        bundle: &Bundle,
    ) -> Result<IntegralOptions> {
        let mut out = self.clone();
        if out.nested && out.cluster && out.bumps.is_empty() {
            out.bumps = peak_bumps(alpha, beta, bundle, PEAK_SCAN, PEAK_RATIO)?;
        }
        Ok(out)
    }

    /// Integrates `f(t, s, h)` over the torus, where `h ≡ t − s` is the
    /// offset reduced to `[−π, π)`.
    pub(crate) fn integrate<F>(&self, f: F) -> Result<Quadrature>
    where
        F: Fn(f64, f64, f64) -> Result<f64> + Sync,
    {
        let grid = TorusGrid::new(self.grid)?;
        if self.nested {
            let rule = PeriodicRule::clustered(grid.n, grid.offset, &self.bumps);
            nested_torus_integral(|s, h| f(s + h, s, h), &rule, self.inner)
        } else {
            // s nodes sit half a step off the t nodes, so no node is diagonal
            let shift = 0.5 * grid.step();
            torus_integral(
                |t, u| {
                    let s = u - shift;
                    f(t, s, (t - s + PI).rem_euclid(TAU) - PI)
                },
                grid,
            )
        }
    }
}

/// `det(c δ, c(−α′(t) + A_t δ), c β′(s)) / ‖c δ‖³` in the frame of `fiber`,
/// from `α′(t)`, the chord `δ = β(s) − α(t)` and `δ′ = β′(s) − α′(t)`.
///
/// Splitting `β′(s) = α′(t) + δ′` leaves one determinant with two short
/// columns near the diagonal instead of a long one that cancels.
pub(crate) fn integrand_at(
    fiber: &Fiber,
    alpha_d: &Vector,
    delta: &Vector,
    delta_d: &Vector,
    s: f64,
) -> Result<f64> {
    let c = fiber.coords(delta);
    let norm = c.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::FiberOrthogonal {
            t: fiber.t,
            s,
            norm,
        });
    }
    let bend = fiber.a_coords(delta);
    let tangent = fiber.coords(alpha_d);
    let det = c.dot(&(bend - tangent).cross(&fiber.coords(delta_d))) + c.dot(&bend.cross(&tangent));
    Ok(det / (norm * norm * norm))
}

/// Coefficient of `dt ∧ ds` in the linking form at `(t, s)`.
///
/// Fails with a regularity error naming `(t, s)` when the chord has no
/// fiber component.
pub fn linking_integrand(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    t: f64,
    s: f64,
) -> Result<f64> {
    let fiber = bundle.fiber(t)?;
    let a = alpha.eval_jet(t, 1);
    let b = beta.eval_jet(s, 1);
    integrand_at(&fiber, a.d(1), &(b.d(0) - a.d(0)), &(b.d(1) - a.d(1)), s)
}

/// The integrand with `β = α`, evaluated at `(t, s) = (t, t − h)` through
/// the short-chord differences of the curve.
pub fn self_integrand(curve: &TrigCurve, bundle: &Bundle, t: f64, h: f64) -> Result<f64> {
    let fiber = bundle.fiber(t)?;
    let chord = curve.chord_jet(t, -h, 1);
    integrand_at(
        &fiber,
        &curve.derivative_at(t, 1),
        chord.d(0),
        chord.d(1),
        t - h,
    )
}

fn check_pair(alpha: &TrigCurve, beta: &TrigCurve, bundle: &Bundle) -> Result<()> {
    for c in [alpha, beta] {
        if c.dim() != bundle.dim() {
            return Err(Error::DimensionMismatch {
                expected: bundle.dim(),
                got: c.dim(),
            });
        }
    }
    Ok(())
}

/// Smallest `‖n_t(β(s) − α(t))‖` over a `grid × grid` scan, refined by a
/// local search, with its location.
pub fn linking_condition_margin(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    grid: usize,
) -> Result<(f64, (f64, f64))> {
    check_pair(alpha, beta, bundle)?;
    let h = TAU / grid as f64;
    let betas: Vec<Vector> = (0..grid).map(|j| beta.eval(j as f64 * h)).collect();
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for i in 0..grid {
        let t = i as f64 * h;
        let frame = bundle.frame(t)?;
        let a = alpha.eval(t);
        for (j, b) in betas.iter().enumerate() {
            let m = frame.coords(&(b - &a)).norm();
            if m < best.0 {
                best = (m, (t, j as f64 * h));
            }
        }
    }
    let f = |t: f64, s: f64| -> f64 {
        match bundle.frame(t) {
            Ok(fr) => fr.coords(&(beta.eval(s) - alpha.eval(t))).norm(),
            Err(_) => 0.0,
        }
    };
    let (m, loc) = refine_minimum(&f, best.1, h);
    Ok(if m < best.0 {
        (m, (loc.0.rem_euclid(TAU), loc.1.rem_euclid(TAU)))
    } else {
        best
    })
}

fn require_condition(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    grid: usize,
) -> Result<(f64, (f64, f64))> {
    let (margin, (t, s)) = linking_condition_margin(alpha, beta, bundle, grid)?;
    if margin <= CONDITION_FLOOR {
        return Err(Error::FiberOrthogonal { t, s, norm: margin });
    }
    Ok((margin, (t, s)))
}

/// Chords whose fiber component is small relative to their length make
/// narrow peaks in the integrand; bumps at those `s` values let a clustered
/// outer rule resolve them.
///
/// Scans a `scan × scan` grid outside a band around the diagonal and keeps
/// interior local minima of `‖n_t δ‖ / ‖δ‖` below `ratio`. Each is refined
/// to a local minimum of `‖n_t δ‖`; minima that slide into the band are
/// dropped, and the rest get a bump twice as wide as the `s`-distance over
/// which the fiber component doubles. Bumps wider than 0.2 are not needed.
pub fn peak_bumps(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    scan: usize,
    ratio: f64,
) -> Result<Vec<Bump>> {
    check_pair(alpha, beta, bundle)?;
    let h = TAU / scan as f64;
    let band = TAU / 32.0;
    let off_band = |t: f64, s: f64, width: f64| {
        let d = (s - t).rem_euclid(TAU);
        d.min(TAU - d) >= width
    };
    let betas: Vec<Vector> = (0..scan).map(|j| beta.eval(j as f64 * h)).collect();
    let mut grid = vec![vec![f64::INFINITY; scan]; scan];
    for (i, row) in grid.iter_mut().enumerate() {
        let t = i as f64 * h;
        let frame = bundle.frame(t)?;
        let a = alpha.eval(t);
        for (j, b) in betas.iter().enumerate() {
            if !off_band(t, j as f64 * h, band) {
                continue;
            }
            let chord = b - &a;
            row[j] = frame.coords(&chord).norm() / chord.norm();
        }
    }
    let f = |t: f64, s: f64| -> f64 {
        match bundle.frame(t) {
            Ok(fr) => fr.coords(&(beta.eval(s) - alpha.eval(t))).norm(),
            Err(_) => 0.0,
        }
    };
    let mut bumps: Vec<Bump> = Vec::new();
    for i in 0..scan {
        for j in 0..scan {
            let v = grid[i][j];
            if !(v < ratio) {
                continue;
            }
            let is_min = (0..9).filter(|&k| k != 4).all(|k| {
                let w = grid[(i + scan + k / 3 - 1) % scan][(j + scan + k % 3 - 1) % scan];
                w.is_finite() && v <= w
            });
            if !is_min {
                continue;
            }
            let (m, (t, s)) = refine_minimum(&f, (i as f64 * h, j as f64 * h), h);
            if !off_band(t, s, 0.5 * band) {
                continue;
            }
            let speed = bundle.frame(t)?.coords(&beta.derivative_at(s, 1)).norm();
            let width = 2.0 * m / speed.max(1e-12);
            if width >= 0.2 {
                continue;
            }
            let center = s.rem_euclid(TAU);
            let near = bumps.iter().any(|b| {
                let d = (b.center - center).rem_euclid(TAU);
                d.min(TAU - d) < b.width.max(width)
            });
            if !near {
                bumps.push(Bump {
                    center,
                    width: width.max(1e-3),
                    mass: 0.25,
                });
            }
        }
    }
    Ok(bumps)
}

/// Linking number by the offset midpoint rule on `grid`.
pub fn linking_number_integral(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    grid: TorusGrid,
) -> Result<InvariantResult> {
    linking_number_integral_with(
        alpha,
        beta,
        bundle,
        &IntegralOptions {
            grid: grid.n,
            ..IntegralOptions::midpoint(grid.n)
        },
    )
}

pub fn linking_number_integral_with(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    opts: &IntegralOptions,
) -> Result<InvariantResult> {
    let (margin, location) = require_condition(alpha, beta, bundle, opts.grid.min(256))?;
    let opts = opts.resolved(alpha, beta, bundle)?;
    let q = opts.integrate(|t, s, _| linking_integrand(alpha, beta, bundle, t, s))?;
    let diagnostics = Diagnostics {
        grid: Some(opts.grid),
        quadrature: Some(q),
        condition_margin: Some(margin),
        condition_location: Some(location),
        bumps: opts.bumps.clone(),
        ..Diagnostics::default()
    };
    InvariantResult::round(
        q.value / (4.0 * PI),
        Method::Integral,
        diagnostics,
        opts.max_residual,
    )
}

/// A vector field along the first curve.
pub type Section<'a> = &'a (dyn Fn(f64) -> Vector + Sync);

/// Linking number by counting where the chord's fiber component is a
/// multiple of `n_t μ(t)`.
///
/// With `section = None` the first frame vector of the bundle is used.
pub fn linking_number_intersection(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    bundle: &Bundle,
    section: Option<Section>,
    opts: &RootOptions,
) -> Result<InvariantResult> {
    let (margin, location) = require_condition(alpha, beta, bundle, 256)?;
    let first = |t: f64| -> Vector {
        bundle
            .frame(t)
            .map(|f| f.basis()[0].clone())
            .unwrap_or_else(|_| Vector::zeros(bundle.dim()))
    };
    let mu: Section = match section {
        Some(m) => m,
        None => &first,
    };
    // n_t μ must not vanish; checked where the system is evaluated
    let mu_coords = |fiber: &Fiber| -> Result<Vector3<f64>> {
        let c = fiber.coords(&mu(fiber.t));
        if c.norm() < CONDITION_FLOOR {
            return Err(Error::InvalidArgument(format!(
                "section has no fiber component at t = {}",
                fiber.t
            )));
        }
        Ok(c)
    };
    let system = |u: &[f64]| -> Result<Vec<f64>> {
        let fiber = bundle.fiber(u[0])?;
        let c = fiber.coords(&(beta.eval(u[1]) - alpha.eval(u[0])));
        let m = mu_coords(&fiber)?;
        let r = c - m * u[2];
        Ok(vec![r[0], r[1], r[2]])
    };
    let extra = |t: f64, s: f64| -> Result<f64> {
        let fiber = bundle.fiber(t)?;
        let c = fiber.coords(&(beta.eval(s) - alpha.eval(t)));
        let m = mu_coords(&fiber)?;
        Ok(c.dot(&m) / m.norm_squared())
    };
    let problem = RootProblem {
        dim: 3,
        system: &system,
        extra: Some(&extra),
    };
    let scan = find_roots_stable(&problem, opts)?;

    let mut total = 0i64;
    let mut records = Vec::with_capacity(scan.roots.len());
    for root in &scan.roots {
        let (t, s, lambda) = (root.location[0], root.location[1], root.location[2]);
        let fiber = bundle.fiber(t)?;
        let a = alpha.eval_jet(t, 1);
        let b = beta.eval_jet(s, 1);
        let delta = b.d(0) - a.d(0);
        let h = SECTION_FD_STEP;
        let mu_t = mu(t);
        let mu_d = (mu(t + h) - mu(t - h)) / (2.0 * h);
        let tangent =
            fiber.coords(&(a.d(1) + &mu_d * lambda)) - fiber.a_coords(&(&delta - &mu_t * lambda));
        let e = Matrix3::from_columns(&[fiber.coords(b.d(1)), tangent, fiber.coords(&mu_t)])
            .determinant();
        let d = lambda * fiber.coords(&mu_t).norm_squared() * e;
        let sign = if d > 0.0 { 1 } else { -1 };
        total += sign;
        records.push(IntersectionRecord {
            t,
            s,
            fiber_coords: vec![lambda],
            sign_factor: if lambda > 0.0 { 1 } else { -1 },
            index: Some(if e > 0.0 { 1 } else { -1 }),
            contribution: 0.5 * sign as f64,
            jacobian_det: root.jacobian_det,
            residual: root.residual,
        });
    }
    let diagnostics = Diagnostics {
        condition_margin: Some(margin),
        condition_location: Some(location),
        seeds: Some(scan.seeds),
        roots: scan.roots,
        intersections: records,
        notes: scan.warnings,
        ..Diagnostics::default()
    };
    InvariantResult::round(
        0.5 * total as f64,
        Method::Intersection,
        diagnostics,
        MAX_RESIDUAL,
    )
}

/// The classical Gauss double integral for two disjoint curves in R³.
pub fn gauss_linking_r3(
    alpha: &TrigCurve,
    beta: &TrigCurve,
    grid: TorusGrid,
) -> Result<InvariantResult> {
    for c in [alpha, beta] {
        if c.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: c.dim(),
            });
        }
    }
    // in R³ the coordinate bundle's fiber component is the chord itself
    let (distance, (t, s)) = linking_condition_margin(alpha, beta, &Bundle::coordinate(3), 256)?;
    if distance <= CONDITION_FLOOR {
        return Err(Error::CurvesIntersect { t, s, distance });
    }
    let q = torus_integral(
        |t, s| {
            let a = alpha.eval_jet(t, 1);
            let b = beta.eval_jet(s, 1);
            let d = b.d(0) - a.d(0);
            let r = d.norm();
            if r < 1e-6 {
                return Err(Error::CurvesIntersect { t, s, distance: r });
            }
            let d3 = Vector3::new(d[0], d[1], d[2]);
            let a1 = Vector3::new(a.d(1)[0], a.d(1)[1], a.d(1)[2]);
            let b1 = Vector3::new(b.d(1)[0], b.d(1)[1], b.d(1)[2]);
            Ok(d3.dot(&(-a1).cross(&b1)) / (r * r * r))
        },
        grid,
    )?;
    let diagnostics = Diagnostics {
        grid: Some(grid.n),
        quadrature: Some(q),
        ..Diagnostics::default()
    };
    InvariantResult::round(
        q.value / (4.0 * PI),
        Method::GaussR3,
        diagnostics,
        MAX_RESIDUAL,
    )
}
