//! Rank-3 oriented subbundles of the trivial bundle over a closed curve.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curves::TrigCurve;
use crate::error::{Error, Result};
use crate::frames::{fiber_cross, frenet, gram_schmidt_with_norms, partial_frenet, Frame3};
use crate::Vector;

/// Step for central differences of projections when no exact frame
/// derivative is available.
pub const PROJECTION_FD_STEP: f64 = 1e-4;

/// Frame-valued function of the parameter.
pub type FrameFn = dyn Fn(f64) -> Result<Frame3> + Send + Sync;

#[derive(Clone)]
pub enum BundleKind {
    /// Fiber spanned by `α′, α″, α‴`, frame `(f_1, f_2, f_3)`.
    Osculating,
    /// Fiber spanned by the last three Frenet vectors.
    Orthogonal,
    /// The same frame at every parameter.
    Constant(Frame3),
    /// Caller-supplied frame generator.
    Custom(Arc<FrameFn>),
}

impl fmt::Debug for BundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleKind::Osculating => write!(f, "Osculating"),
            BundleKind::Orthogonal => write!(f, "Orthogonal"),
            BundleKind::Constant(frame) => f.debug_tuple("Constant").field(frame).finish(),
            BundleKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// An oriented rank-3 bundle along a curve.
#[derive(Debug, Clone)]
pub struct Bundle {
    kind: BundleKind,
    curve: Option<TrigCurve>,
    dim: usize,
}

/// The fiber at one parameter value together with the outward parts
/// `(I − P) b_i′` of its frame derivatives.
///
/// Those parts determine both `P′ = Σ (o_i b_iᵀ + b_i o_iᵀ)` and
/// `A_t = Σ b_i o_iᵀ`.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub t: f64,
    pub frame: Frame3,
    pub outward: [Vector; 3],
}

/// Orthogonal projection onto a fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator {
    pub matrix: DMatrix<f64>,
}

impl ProjectionOperator {
    pub fn apply(&self, x: &Vector) -> Vector {
        &self.matrix * x
    }

    /// `‖P² − P‖` in max-entry norm.
    pub fn idempotency_defect(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).amax()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

impl Fiber {
    /// Frame coordinates of `n_t x`.
    pub fn coords(&self, x: &Vector) -> nalgebra::Vector3<f64> {
        self.frame.coords(x)
    }

    /// Frame coordinates of `A_t x`.
    pub fn a_coords(&self, x: &Vector) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(
            self.outward[0].dot(x),
            self.outward[1].dot(x),
            self.outward[2].dot(x),
        )
    }

    pub fn a_apply(&self, x: &Vector) -> Vector {
        self.frame.from_coords(&self.a_coords(x))
    }

    pub fn projection(&self) -> ProjectionOperator {
        ProjectionOperator {
            matrix: self.frame.projection_matrix(),
        }
    }

    pub fn projection_derivative(&self) -> DMatrix<f64> {
        let n = self.frame.dim();
        let mut d = DMatrix::zeros(n, n);
        for (b, o) in self.frame.basis().iter().zip(&self.outward) {
            d.ger(1.0, o, b, 1.0);
            d.ger(1.0, b, o, 1.0);
        }
        d
    }

    /// `A_t = Σ b_i o_iᵀ` as a matrix.
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let n = self.frame.dim();
        let mut a = DMatrix::zeros(n, n);
        for (b, o) in self.frame.basis().iter().zip(&self.outward) {
            a.ger(1.0, b, o, 1.0);
        }
        a
    }
}

impl Bundle {
    pub fn osculating(curve: &TrigCurve) -> Bundle {
        Bundle {
            kind: BundleKind::Osculating,
            dim: curve.dim(),
            curve: Some(curve.clone()),
        }
    }

    /// Orthogonal bundle, oriented so that the fiber frame followed by the
    /// Frenet vectors `f_1..f_{n−3}` is positively oriented in Rⁿ: the frame is
    /// `(f_{n−2}, f_{n−1}, (−1)^{n−1} f_n)`.
    pub fn orthogonal(curve: &TrigCurve) -> Bundle {
        Bundle {
            kind: BundleKind::Orthogonal,
            dim: curve.dim(),
            curve: Some(curve.clone()),
        }
    }

    pub fn constant(frame: Frame3) -> Bundle {
        Bundle {
            dim: frame.dim(),
            kind: BundleKind::Constant(frame),
            curve: None,
        }
    }

    /// The first three coordinate axes of Rⁿ.
    pub fn coordinate(dim: usize) -> Bundle {
        let e = |i: usize| {
            let mut v = Vector::zeros(dim);
            v[i] = 1.0;
            v
        };
        Bundle::constant(Frame3::new_unchecked([e(0), e(1), e(2)]))
    }

    pub fn custom(dim: usize, generator: Arc<FrameFn>) -> Bundle {
        Bundle {
            kind: BundleKind::Custom(generator),
            curve: None,
            dim,
        }
    }

    /// Custom bundle whose frame is Gram–Schmidt of three trig-poly vector fields.
    pub fn from_fields(fields: [TrigCurve; 3]) -> Result<Bundle> {
        let dim = fields[0].dim();
        if fields.iter().any(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: fields
                    .iter()
                    .map(TrigCurve::dim)
                    .find(|&d| d != dim)
                    .unwrap_or(dim),
            });
        }
        let generator = move |t: f64| -> Result<Frame3> {
            let vs = [fields[0].eval(t), fields[1].eval(t), fields[2].eval(t)];
            let (q, _) = gram_schmidt_with_norms(&vs).map_err(|e| match e {
                Error::RankDeficient { index, residual } => Error::DegenerateFrame {
                    t,
                    index: index + 1,
                    residual,
                },
                other => other,
            })?;
            let [a, b, c]: [Vector; 3] = q.try_into().expect("three vectors");
            Ok(Frame3::new_unchecked([a, b, c]))
        };
        Ok(Bundle::custom(dim, Arc::new(generator)))
    }

    pub fn kind(&self) -> &BundleKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Short name used in reports.
    pub fn label(&self) -> &'static str {
        match self.kind {
            BundleKind::Osculating => "osculating",
            BundleKind::Orthogonal => "orthogonal",
            BundleKind::Constant(_) => "constant",
            BundleKind::Custom(_) => "custom",
        }
    }

    fn curve(&self) -> &TrigCurve {
        self.curve
            .as_ref()
            .expect("Frenet bundles carry their curve")
    }

    /// The oriented frame of the fiber at `t`.
    pub fn frame(&self, t: f64) -> Result<Frame3> {
        match &self.kind {
            BundleKind::Constant(frame) => Ok(frame.clone()),
            BundleKind::Custom(g) => g(t),
            _ => Ok(self.fiber(t)?.frame),
        }
    }

    /// Frame plus outward derivative parts; exact for Frenet-derived kinds.
    pub fn fiber(&self, t: f64) -> Result<Fiber> {
        match &self.kind {
            BundleKind::Osculating => {
                let app = partial_frenet(self.curve(), t, 3)?;
                let outward = [
                    Vector::zeros(self.dim),
                    Vector::zeros(self.dim),
                    app.outer_part(4) / app.residuals[2],
                ];
                let [a, b, c]: [Vector; 3] = app.frame.try_into().expect("three vectors");
                Ok(Fiber {
                    t,
                    frame: Frame3::new_unchecked([a, b, c]),
                    outward,
                })
            }
            BundleKind::Orthogonal => {
                let n = self.dim;
                let app = frenet(self.curve(), t)?;
                let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
                let mut first_out = Vector::zeros(n);
                if n > 3 {
                    first_out = app.f(n - 3) * (-app.speed * app.kappa(n - 3));
                }
                let frame = Frame3::new_unchecked([
                    app.f(n - 2).clone(),
                    app.f(n - 1).clone(),
                    app.f(n) * sign,
                ]);
                Ok(Fiber {
                    t,
                    frame,
                    outward: [first_out, Vector::zeros(n), Vector::zeros(n)],
                })
            }
            BundleKind::Constant(frame) => Ok(Fiber {
                t,
                frame: frame.clone(),
                outward: [
                    Vector::zeros(self.dim),
                    Vector::zeros(self.dim),
                    Vector::zeros(self.dim),
                ],
            }),
            BundleKind::Custom(g) => {
                let frame = g(t)?;
                let dp = self.projection_derivative_fd(t)?;
                let p = frame.projection_matrix();
                let q = DMatrix::identity(self.dim, self.dim) - p;
                let outward = frame.basis().clone().map(|b| &q * (&dp * b));
                Ok(Fiber { t, frame, outward })
            }
        }
    }

    pub fn projection(&self, t: f64) -> Result<ProjectionOperator> {
        Ok(ProjectionOperator {
            matrix: self.frame(t)?.projection_matrix(),
        })
    }

    /// `P′(t)` by central differences with step [`PROJECTION_FD_STEP`].
    pub fn projection_derivative_fd(&self, t: f64) -> Result<DMatrix<f64>> {
        let h = PROJECTION_FD_STEP;
        let plus = self.frame(t + h)?.projection_matrix();
        let minus = self.frame(t - h)?.projection_matrix();
        Ok((plus - minus) / (2.0 * h))
    }

    /// `A_t = P P′ (I − P)`, with exact `P′` where the kind allows it.
    pub fn a_operator(&self, t: f64) -> Result<DMatrix<f64>> {
        let fiber = self.fiber(t)?;
        let p = fiber.frame.projection_matrix();
        let q = DMatrix::identity(self.dim, self.dim) - &p;
        Ok(&p * fiber.projection_derivative() * q)
    }

    /// `A_t = P P′ (I − P)` with `P′` always by central differences.
    pub fn a_operator_fd(&self, t: f64) -> Result<DMatrix<f64>> {
        let p = self.projection(t)?.matrix;
        let q = DMatrix::identity(self.dim, self.dim) - &p;
        Ok(&p * self.projection_derivative_fd(t)? * q)
    }
}

/// Step for central differences of sections.
pub const SECTION_FD_STEP: f64 = 1e-5;

/// `(Dh)(t) = P(t) h′(t)`, with `h′` by central differences.
pub fn covariant_derivative(
    bundle: &Bundle,
    section: &dyn Fn(f64) -> Vector,
    t: f64,
) -> Result<Vector> {
    let h = SECTION_FD_STEP;
    let d = (section(t + h) - section(t - h)) / (2.0 * h);
    Ok(bundle.projection(t)?.apply(&d))
}

/// Result of transporting a frame along the bundle.
#[derive(Debug, Clone)]
pub struct Transport {
    /// Re-orthonormalized transported frame.
    pub frame: Frame3,
    /// Raw integrator output before re-orthonormalization.
    pub raw: [Vector; 3],
    /// Largest entry of `|GᵀG − I|` for the raw output.
    pub drift: f64,
    pub steps: usize,
}

/// Absolute tolerance of the transport integrator.
pub const TRANSPORT_TOL: f64 = 1e-10;

/// Parallel transport from `t0` to `t1` by integrating `h′ = (I − P) P′ h`
/// with an adaptive Dormand–Prince 5(4) scheme.
pub fn parallel_transport(bundle: &Bundle, t0: f64, t1: f64, start: &Frame3) -> Result<Transport> {
    parallel_transport_with_tol(bundle, t0, t1, start, TRANSPORT_TOL)
}

pub fn parallel_transport_with_tol(
    bundle: &Bundle,
    t0: f64,
    t1: f64,
    start: &Frame3,
    tol: f64,
) -> Result<Transport> {
    let n = bundle.dim();
    let rhs = |t: f64, y: &[Vector; 3]| -> Result<[Vector; 3]> {
        let fiber = bundle.fiber(t)?;
        let q = DMatrix::identity(n, n) - fiber.frame.projection_matrix();
        let dp = fiber.projection_derivative();
        let m = q * dp;
        Ok(y.clone().map(|h| &m * h))
    };
    let (raw, steps) = dormand_prince(rhs, t0, t1, start.basis().clone(), tol)?;
    let drift = crate::frames::orthonormality_defect(&raw);
    let frame = Frame3::orthonormalize(&raw[0], &raw[1], &raw[2])?;
    Ok(Transport {
        frame,
        raw,
        drift,
        steps,
    })
}

fn combine(y: &[Vector; 3], ks: &[&[Vector; 3]], coefs: &[f64], h: f64) -> [Vector; 3] {
    let mut out = y.clone();
    for (k, &c) in ks.iter().zip(coefs) {
        if c != 0.0 {
            for i in 0..3 {
                out[i].axpy(h * c, &k[i], 1.0);
            }
        }
    }
    out
}

fn dormand_prince<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [Vector; 3],
    tol: f64,
) -> Result<([Vector; 3], usize)>
where
    F: Fn(f64, &[Vector; 3]) -> Result<[Vector; 3]>,
{
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [&[f64]; 7] = [
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
        ],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // fifth-order weights minus fourth-order weights
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0, 0));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() / 100.0).min(0.05);
    let mut steps = 0;
    let mut k1 = f(t, &y)?;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow { t });
        }
        let mut ks: Vec<[Vector; 3]> = vec![k1.clone()];
        for stage in 1..7 {
            let refs: Vec<&[Vector; 3]> = ks.iter().collect();
            let ys = combine(&y, &refs, A[stage], h);
            ks.push(f(t + C[stage] * h, &ys)?);
        }
        let refs: Vec<&[Vector; 3]> = ks.iter().collect();
        let err_vec = combine(
            &[
                Vector::zeros(y[0].len()),
                Vector::zeros(y[0].len()),
                Vector::zeros(y[0].len()),
            ],
            &refs,
            &E,
            h,
        );
        let err = err_vec.iter().map(|v| v.amax()).fold(0.0, f64::max);
        if err <= tol {
            y = combine(&y, &refs[..6], A[6], h);
            t += h;
            k1 = ks.pop().expect("seven stages");
            steps += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok((y, steps))
}

/// Tolerances applied by [`check_sl_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionTolerances {
    /// Minimum of `‖n_t(α(s) − α(t))‖` away from the diagonal.
    pub chord: f64,
    /// Minimum relative Gram–Schmidt residual of `α′..α^(k+1)`.
    pub independence: f64,
    /// Maximum relative fiber component of `α′..α^(k−1)`.
    pub low_order_projection: f64,
    /// Minimum normalized area of the fiber components of `α^(k)`, `α^(k+1)`.
    pub wedge: f64,
}

impl Default for ConditionTolerances {
    fn default() -> Self {
        ConditionTolerances {
            chord: 1e-6,
            independence: 1e-9,
            low_order_projection: 1e-8,
            wedge: 1e-9,
        }
    }
}

/// Margins of the regularity conditions for self-linking, with locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub k: usize,
    pub grid: usize,
    /// Half-width of the excluded diagonal band in `|s − t|`.
    pub band: f64,
    /// Condition 1: smallest fiber component of a chord, and its `(t, s)`.
    pub condition1_margin: f64,
    pub condition1_location: (f64, f64),
    /// Condition 2(a): smallest relative Gram–Schmidt residual of `α′..α^(k+1)`.
    pub condition2a_margin: f64,
    pub condition2a_location: f64,
    /// Condition 2(b): largest relative fiber component of `α′..α^(k−1)`
    /// (must stay below its tolerance).
    pub condition2b_max_projection: f64,
    pub condition2b_location: f64,
    /// Condition 2(c): smallest normalized wedge of the fiber components of
    /// `α^(k)` and `α^(k+1)`.
    pub condition2c_margin: f64,
    pub condition2c_location: f64,
    pub tolerances: ConditionTolerances,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl RegularityReport {
    /// Converts a failing report into an error naming the first failure.
    pub fn into_result(self) -> Result<RegularityReport> {
        if self.pass {
            return Ok(self);
        }
        if self.condition1_margin <= self.tolerances.chord {
            let (t, s) = self.condition1_location;
            return Err(Error::FiberOrthogonal {
                t,
                s,
                norm: self.condition1_margin,
            });
        }
        Err(Error::Conditions(self.failures.join("; ")))
    }
}

/// Evaluates conditions 1 and 2(a)–(c) for self-linking of order `k` on a
/// `grid × grid` torus grid.
///
/// Failures are reported in the margins, never raised; frame failures at a
/// sample count as a zero independence margin there.
pub fn check_sl_conditions(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    grid: usize,
) -> Result<RegularityReport> {
    check_sl_conditions_with(curve, bundle, k, grid, ConditionTolerances::default())
}

pub fn check_sl_conditions_with(
    curve: &TrigCurve,
    bundle: &Bundle,
    k: usize,
    grid: usize,
    tolerances: ConditionTolerances,
) -> Result<RegularityReport> {
    let n = curve.dim();
    if k < 1 || k + 2 > n {
        return Err(Error::InvalidArgument(format!(
            "order k = {k} outside 1..={}",
            n - 2
        )));
    }
    if grid < 8 {
        return Err(Error::InvalidArgument(format!("grid {grid} too small")));
    }
    let h = TAU / grid as f64;
    let band = TAU / 64.0;
    let points: Vec<f64> = (0..grid).map(|i| i as f64 * h).collect();
    let values: Vec<Vector> = points.iter().map(|&s| curve.eval(s)).collect();

    let mut c1 = (f64::INFINITY, (0.0, 0.0));
    let mut c2a = (f64::INFINITY, 0.0);
    let mut c2b = (0.0f64, 0.0);
    let mut c2c = (f64::INFINITY, 0.0);
    let mut frames = Vec::with_capacity(grid);
    for (i, &t) in points.iter().enumerate() {
        let jet = curve.eval_jet(t, k + 1);
        let independence = match gram_schmidt_with_norms(&jet.values[1..=k + 1]) {
            Ok((_, norms)) => norms
                .iter()
                .zip(&jet.values[1..=k + 1])
                .map(|(r, v)| r / v.norm())
                .fold(f64::INFINITY, f64::min),
            Err(_) => 0.0,
        };
        if independence < c2a.0 {
            c2a = (independence, t);
        }
        let frame = match bundle.frame(t) {
            Ok(f) => f,
            Err(_) => {
                c2a = (0.0, t);
                frames.push(None);
                continue;
            }
        };
        for j in 1..k {
            let v = jet.d(j);
            let rel = frame.coords(v).norm() / v.norm();
            if rel > c2b.0 {
                c2b = (rel, t);
            }
        }
        let (a, b) = (jet.d(k), jet.d(k + 1));
        let wedge = fiber_cross(&frame, b, a).norm() / (a.norm() * b.norm());
        if wedge < c2c.0 {
            c2c = (wedge, t);
        }
        for (j, &s) in points.iter().enumerate() {
            let d = (s - t).rem_euclid(TAU);
            if d.min(TAU - d) < band {
                continue;
            }
            let m = frame.coords(&(&values[j] - &values[i])).norm();
            if m < c1.0 {
                c1 = (m, (t, s));
            }
        }
        frames.push(Some(frame));
    }
    if c1.0.is_finite() {
        let f = |t: f64, s: f64| -> f64 {
            match bundle.frame(t) {
                Ok(fr) => fr.coords(&(curve.eval(s) - curve.eval(t))).norm(),
                Err(_) => 0.0,
            }
        };
        let (m, loc) = refine_minimum(&f, c1.1, h);
        let d = (loc.1 - loc.0).rem_euclid(TAU);
        if d.min(TAU - d) >= band {
            c1 = (m, loc);
        }
    }

    let mut failures = Vec::new();
    if c1.0 <= tolerances.chord {
        failures.push(format!(
            "condition 1: chord at (t, s) = ({:.6}, {:.6}) has fiber component {:.3e}",
            c1.1 .0, c1.1 .1, c1.0
        ));
    }
    if c2a.0 <= tolerances.independence {
        failures.push(format!(
            "condition 2(a): derivatives 1..={} dependent near t = {:.6} (margin {:.3e})",
            k + 1,
            c2a.1,
            c2a.0
        ));
    }
    if c2b.0 >= tolerances.low_order_projection {
        failures.push(format!(
            "condition 2(b): low-order derivative has fiber component {:.3e} at t = {:.6}",
            c2b.0, c2b.1
        ));
    }
    if c2c.0 <= tolerances.wedge {
        failures.push(format!(
            "condition 2(c): fiber components of derivatives {k}, {} dependent at t = {:.6} (margin {:.3e})",
            k + 1,
            c2c.1,
            c2c.0
        ));
    }
    Ok(RegularityReport {
        k,
        grid,
        band,
        condition1_margin: c1.0,
        condition1_location: c1.1,
        condition2a_margin: c2a.0,
        condition2a_location: c2a.1,
        condition2b_max_projection: c2b.0,
        condition2b_location: c2b.1,
        condition2c_margin: c2c.0,
        condition2c_location: c2c.1,
        tolerances,
        pass: failures.is_empty(),
        failures,
    })
}

/// Compass search for a local minimum of `f` on the torus.
pub(crate) fn refine_minimum(
    f: &dyn Fn(f64, f64) -> f64,
    start: (f64, f64),
    step: f64,
) -> (f64, (f64, f64)) {
    let (mut t, mut s) = start;
    let mut best = f(t, s);
    let mut h = step;
    // long flat valleys would otherwise be walked at the smallest step
    let mut budget = 20_000;
    while h > 1e-12 && budget > 0 {
        budget -= 1;
        let mut moved = false;
        for (dt, ds) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let v = f(t + dt, s + ds);
            if v < best {
                best = v;
                t += dt;
                s += ds;
                moved = true;
                break;
            }
        }
        if moved {
            h = (2.0 * h).min(step);
        } else {
            h *= 0.5;
        }
    }
    (best, (t.rem_euclid(TAU), s.rem_euclid(TAU)))
}
