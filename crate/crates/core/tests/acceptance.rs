//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p selflink --test acceptance`.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3, Rotation3, UnitQuaternion, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selflink::bundles::{parallel_transport_with_tol, Bundle};
use selflink::curves::TrigPoly;
use selflink::frames::Frame3;
use selflink::linking::{
    gauss_linking_r3, linking_condition_margin, linking_integrand, linking_number_integral,
    IntegralOptions, InvariantResult, Method, CONDITION_FLOOR,
};
use selflink::numerics::{RootOptions, TorusGrid};
use selflink::selflinking::{
    diagonal_phi, orthogonal_developable_intersections, osculating_developable_intersections,
    sl_integral, sl_limit, sl_orthogonal, sl_osculating, SelfLinkOptions,
};
use selflink::{frenet, Error, TrigCurve};

// tolerances as pinned by the criteria
const ROUNDING: f64 = 0.05;
const CELL_SECONDS: f64 = 60.0;
const R3_RESIDUAL: f64 = 1e-3;
const FRAME_DEVIATION: f64 = 1e-10;
const A_DEVIATION: f64 = 1e-6;
const TRANSPORT_DRIFT: f64 = 1e-8;
const CONVERGENCE_RATIO: f64 = 1e3;
// residuals at or below this are at the rounding floor, where no ratio can be observed
const CONVERGENCE_FLOOR: f64 = 1e-10;
const PHI_DEVIATION: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Osculating,
    Orthogonal,
}

struct Cell {
    curve: &'static str,
    a: f64,
    kind: Kind,
    expected: i64,
    /// χ roots counted for this number and the doubled contributions.
    roots: usize,
    doubled: &'static [i64],
}

const CELLS: [Cell; 6] = [
    Cell {
        curve: "example1",
        a: 1.0,
        kind: Kind::Osculating,
        expected: 1,
        roots: 4,
        doubled: &[1, 1, 1, -1],
    },
    Cell {
        curve: "example1",
        a: 1.0,
        kind: Kind::Orthogonal,
        expected: 1,
        roots: 2,
        doubled: &[],
    },
    Cell {
        curve: "example1",
        a: 1.3,
        kind: Kind::Osculating,
        expected: 1,
        roots: 4,
        doubled: &[1, 1, 1, -1],
    },
    Cell {
        curve: "example1",
        a: 1.3,
        kind: Kind::Orthogonal,
        expected: 0,
        roots: 2,
        doubled: &[],
    },
    Cell {
        curve: "example2",
        a: 1.6,
        kind: Kind::Osculating,
        expected: 3,
        roots: 6,
        doubled: &[1, 1, 1, 1, 1, 1],
    },
    Cell {
        curve: "example2",
        a: 1.6,
        kind: Kind::Orthogonal,
        expected: -1,
        roots: 6,
        doubled: &[],
    },
];

impl Cell {
    fn name(&self) -> String {
        let b = match self.kind {
            Kind::Osculating => "SL⊤",
            Kind::Orthogonal => "SL⊥",
        };
        format!("{b}({} A={})", self.curve, self.a)
    }

    fn curve(&self) -> TrigCurve {
        TrigCurve::from_preset(self.curve, self.a).unwrap()
    }

    fn bundle(&self, c: &TrigCurve) -> Bundle {
        match self.kind {
            Kind::Osculating => Bundle::osculating(c),
            Kind::Orthogonal => Bundle::orthogonal(c),
        }
    }

    fn order(&self) -> usize {
        match self.kind {
            Kind::Osculating => 1,
            Kind::Orthogonal => 2,
        }
    }
}

fn options(grid: usize) -> SelfLinkOptions {
    SelfLinkOptions {
        integral: IntegralOptions::nested(grid),
        ..SelfLinkOptions::default()
    }
}

fn integral(cell: &Cell, grid: usize) -> selflink::Result<InvariantResult> {
    let c = cell.curve();
    match cell.kind {
        Kind::Osculating => sl_osculating(&c, &options(grid)),
        Kind::Orthogonal => sl_orthogonal(&c, &options(grid)),
    }
}

fn intersection(cell: &Cell) -> selflink::Result<(usize, Vec<i64>, i64)> {
    let c = cell.curve();
    let (records, result) = match cell.kind {
        Kind::Osculating => orthogonal_developable_intersections(&c, &RootOptions::default())?,
        Kind::Orthogonal => osculating_developable_intersections(&c, &RootOptions::default())?,
    };
    let mut doubled: Vec<i64> = records
        .iter()
        .map(|r| (2.0 * r.contribution).round() as i64)
        .collect();
    doubled.sort_unstable();
    Ok((records.len(), doubled, result.value))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, title: &str, o: &Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} [{tag}] {title}: {}", o.detail);
}

/// Integral values for every cell, timed; shared with criterion 3.
fn criterion_1() -> (Outcome, Vec<Option<i64>>) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for cell in &CELLS {
        let start = Instant::now();
        let r = integral(cell, 512);
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(r) => {
                let ok = r.value == cell.expected
                    && (r.raw - cell.expected as f64).abs() < ROUNDING
                    && secs < CELL_SECONDS;
                pass &= ok;
                parts.push(format!(
                    "{}={} (raw {:+.2e} off, {:.1}s)",
                    cell.name(),
                    r.value,
                    r.raw - cell.expected as f64,
                    secs
                ));
                values.push(Some(r.value));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{} error: {e}", cell.name()));
                values.push(None);
            }
        }
    }
    (
        Outcome {
            pass,
            detail: parts.join("; "),
        },
        values,
    )
}

fn criterion_2() -> (Outcome, Vec<Option<i64>>) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for cell in &CELLS {
        match intersection(cell) {
            Ok((count, doubled, value)) => {
                let mut want = cell.doubled.to_vec();
                want.sort_unstable();
                let ok = count == cell.roots
                    && value == cell.expected
                    && (want.is_empty() || doubled == want);
                pass &= ok;
                parts.push(format!(
                    "{}: {count} roots {doubled:?} → {value}",
                    cell.name()
                ));
                values.push(Some(value));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{} error: {e}", cell.name()));
                values.push(None);
            }
        }
    }
    (
        Outcome {
            pass,
            detail: parts.join("; "),
        },
        values,
    )
}

fn criterion_3(integrals: &[Option<i64>], intersections: &[Option<i64>]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, cell) in CELLS.iter().enumerate() {
        let c = cell.curve();
        let limit = sl_limit(&c, &cell.bundle(&c), cell.order(), &options(256)).map(|r| r.value);
        let limit = limit.ok();
        let all = [limit, integrals[i], intersections[i]];
        let ok = all.iter().all(|v| *v == Some(cell.expected));
        pass &= ok;
        let show = |v: Option<i64>| v.map_or("err".to_string(), |v| v.to_string());
        parts.push(format!(
            "{} limit/integral/intersection {}/{}/{}",
            cell.name(),
            show(all[0]),
            show(all[1]),
            show(all[2])
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn hopf_pair() -> (TrigCurve, TrigCurve) {
    let a = TrigCurve::circle(1.0, [0.0, 0.0, 0.0]);
    let b = TrigCurve::new(vec![
        TrigPoly::constant(1.0).with_term(1, 1.0, 0.0),
        TrigPoly::constant(0.0),
        TrigPoly::default().with_term(1, 0.0, 1.0),
    ])
    .unwrap();
    (a, b)
}

fn criterion_4() -> Outcome {
    let grid = TorusGrid::new(256).unwrap();
    let bundle = Bundle::coordinate(3);
    let mut parts = Vec::new();
    let mut pass = true;

    let (a, b) = hopf_pair();
    match (
        linking_number_integral(&a, &b, &bundle, grid),
        gauss_linking_r3(&a, &b, grid),
    ) {
        (Ok(r), Ok(g)) => {
            // the sign is frozen by the golden test in tests/linking.rs
            let ok = r.value == -1 && g.value == -1 && r.residual < R3_RESIDUAL;
            pass &= ok;
            parts.push(format!("Hopf {} (residual {:.1e})", r.value, r.residual));
        }
        (r, g) => {
            pass = false;
            parts.push(format!("Hopf error: {:?} {:?}", r.err(), g.err()));
        }
    }

    let far = TrigCurve::circle(0.7, [5.0, -1.0, 0.5]);
    match linking_number_integral(&a, &far, &bundle, grid) {
        Ok(r) => {
            pass &= r.value == 0 && r.residual < R3_RESIDUAL;
            parts.push(format!("distant {} (residual {:.1e})", r.value, r.residual));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("distant error: {e}"));
        }
    }

    let ellipse = TrigCurve::new(vec![
        TrigPoly::default().with_term(1, 2.0, 0.0),
        TrigPoly::default().with_term(1, 0.0, 1.0),
        TrigPoly::constant(0.0),
    ])
    .unwrap();
    match sl_integral(&ellipse, &bundle, 1, &options(256)) {
        Ok(r) => {
            pass &= r.value == 0 && r.residual < R3_RESIDUAL;
            parts.push(format!(
                "planar convex SL {} (residual {:.1e})",
                r.value, r.residual
            ));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("planar error: {e}"));
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    // uniform on SO(3) via a uniformly distributed unit quaternion
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let q = Vector4::new(
        (1.0 - u1).sqrt() * (TAU * u2).sin(),
        (1.0 - u1).sqrt() * (TAU * u2).cos(),
        u1.sqrt() * (TAU * u3).sin(),
        u1.sqrt() * (TAU * u3).cos(),
    );
    Rotation3::from(UnitQuaternion::from_quaternion(q.into())).into_inner()
}

fn turned(base: Bundle, r: Matrix3<f64>) -> Bundle {
    Bundle::custom(
        base.dim(),
        Arc::new(move |t: f64| -> selflink::Result<Frame3> { Ok(base.frame(t)?.rotated(&r)) }),
    )
}

fn meridian(curve: &TrigCurve, t0: f64, r: f64) -> TrigCurve {
    let app = frenet(curve, t0).unwrap();
    let p = curve.eval(t0);
    let coords = (0..curve.dim())
        .map(|d| TrigPoly::constant(p[d]).with_term(1, r * app.f(2)[d], r * app.f(3)[d]))
        .collect();
    TrigCurve::new(coords).unwrap()
}

fn presets() -> [TrigCurve; 2] {
    [TrigCurve::example1(1.0), TrigCurve::example2(1.6)]
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut parts = Vec::new();
    let mut pass = true;

    // frame independence
    let a = TrigCurve::example1(1.0);
    let b = meridian(&a, 0.7, 0.2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = random_rotation(&mut rng);
        let (t, s) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let plain = turned(Bundle::osculating(&a), Matrix3::identity());
        let rotated = turned(Bundle::osculating(&a), r);
        match (
            linking_integrand(&a, &b, &plain, t, s),
            linking_integrand(&a, &b, &rotated, t, s),
        ) {
            (Ok(x), Ok(y)) => worst = worst.max((x - y).abs()),
            _ => worst = f64::INFINITY,
        }
    }
    pass &= worst <= FRAME_DEVIATION;
    parts.push(format!("frame {worst:.1e}"));

    // A_t against the parallel-frame derivative
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = &presets()[rng.random_range(0..2)];
        let bundle = if rng.random::<bool>() {
            Bundle::orthogonal(c)
        } else {
            Bundle::osculating(c)
        };
        let t = rng.random_range(0.0..TAU);
        let start = bundle.frame(t).unwrap();
        let e = 1e-3;
        let at = |dt: f64| {
            parallel_transport_with_tol(&bundle, t, t + dt, &start, 1e-13)
                .unwrap()
                .raw
        };
        let (p1, m1, p2, m2) = (at(e), at(-e), at(2.0 * e), at(-2.0 * e));
        let mut parallel = DMatrix::zeros(c.dim(), c.dim());
        for i in 0..3 {
            let d = (&p1[i] - &m1[i]) * (8.0 / (12.0 * e)) - (&p2[i] - &m2[i]) * (1.0 / (12.0 * e));
            parallel.ger(1.0, &start.basis()[i], &d, 1.0);
        }
        worst = worst.max((bundle.a_operator(t).unwrap() - parallel).amax());
    }
    pass &= worst <= A_DEVIATION;
    parts.push(format!("A {worst:.1e}"));

    // transport drift over a period
    let mut worst: f64 = 0.0;
    for c in presets() {
        for bundle in [Bundle::osculating(&c), Bundle::orthogonal(&c)] {
            let start = bundle.frame(0.0).unwrap();
            let tr = parallel_transport_with_tol(&bundle, 0.0, TAU, &start, 1e-10).unwrap();
            worst = worst.max(tr.drift);
        }
    }
    pass &= worst <= TRANSPORT_DRIFT;
    parts.push(format!("drift {worst:.1e}"));

    // homotopy: 5 steps of a deformation that keeps the chord condition
    let grid = TorusGrid::new(256).unwrap();
    let bump = TrigCurve::new(
        (0..4)
            .map(|d| TrigPoly::default().with_term(2, 0.02 * (d as f64 + 1.0), -0.01 * d as f64))
            .collect(),
    )
    .unwrap();
    let mut values = Vec::new();
    let mut margins_ok = true;
    for step in 0..=5 {
        let moved = b.add(&bump.scaled(step as f64 / 5.0)).unwrap();
        let bundle = Bundle::osculating(&a);
        margins_ok &= linking_condition_margin(&a, &moved, &bundle, 256)
            .map(|(m, _)| m > CONDITION_FLOOR)
            .unwrap_or(false);
        values.push(
            linking_number_integral(&a, &moved, &bundle, grid)
                .map(|r| r.value)
                .ok(),
        );
    }
    let constant = margins_ok && values.iter().all(|v| v.is_some() && *v == values[0]);
    pass &= constant;
    parts.push(format!("homotopy {values:?}"));

    // convergence from N = 128 to N = 256
    let mut conv = Vec::new();
    for cell in CELLS.iter().filter(|c| c.a != 1.3) {
        match (integral(cell, 128), integral(cell, 256)) {
            (Ok(r1), Ok(r2)) => {
                let ok = r2.residual <= CONVERGENCE_FLOOR
                    || r1.residual >= CONVERGENCE_RATIO * r2.residual;
                pass &= ok;
                conv.push(format!("{:.0e}→{:.0e}", r1.residual, r2.residual));
            }
            _ => {
                pass = false;
                conv.push("error".into());
            }
        }
    }
    parts.push(format!("convergence {}", conv.join(" ")));

    // φ against −κ₂|α′| for the osculating bundle
    let mut worst: f64 = 0.0;
    for c in presets() {
        let bundle = Bundle::osculating(&c);
        for i in 0..256 {
            let t = TAU * i as f64 / 256.0;
            let app = frenet(&c, t).unwrap();
            let phi = diagonal_phi(&c, &bundle, 1, t).unwrap();
            worst = worst.max((phi + app.kappa(2) * app.speed).abs());
        }
    }
    pass &= worst <= PHI_DEVIATION;
    parts.push(format!("φ {worst:.1e}"));

    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let c = TrigCurve::example1(1.0);

    // a floor no root can clear
    let strict = RootOptions {
        transversality_floor: 1e6,
        ..RootOptions::default()
    };
    let named = matches!(
        osculating_developable_intersections(&c, &strict),
        Err(Error::Transversality { .. })
    );
    pass &= named;
    parts.push(format!(
        "transversality {}",
        if named { "named" } else { "missing" }
    ));

    let direct = matches!(
        InvariantResult::round(0.4, Method::Integral, Default::default(), ROUNDING),
        Err(Error::ResidualTooLarge { .. })
    );
    // a real computation: the meridian in the f2, f3 plane is nearly tangent
    // to the orthogonal fibers, and a 64-grid cannot resolve it
    let b = meridian(&c, 0.7, 0.2);
    let coarse =
        linking_number_integral(&c, &b, &Bundle::orthogonal(&c), TorusGrid::new(64).unwrap());
    let refused = direct
        && matches!(coarse, Err(Error::ResidualTooLarge { residual, .. }) if residual > ROUNDING);
    pass &= refused;
    parts.push(format!(
        "rounding {}",
        if refused { "refused" } else { "accepted" }
    ));

    let off = TrigCurve::example1(1.0);
    let wall = {
        let app = frenet(&off, 0.7).unwrap();
        let p = off.eval(0.7);
        TrigCurve::new(
            (0..4)
                .map(|d| {
                    TrigPoly::constant(p[d]).with_term(1, 0.2 * app.f(3)[d], 0.2 * app.f(4)[d])
                })
                .collect(),
        )
        .unwrap()
    };
    let located = match linking_number_integral(
        &off,
        &wall,
        &Bundle::osculating(&off),
        TorusGrid::new(64).unwrap(),
    ) {
        Err(e @ Error::FiberOrthogonal { .. }) => e.to_string().contains("(t, s) = ("),
        _ => false,
    };
    pass &= located;
    parts.push(format!(
        "regularity {}",
        if located { "located" } else { "unlocated" }
    ));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let (c1, integrals) = criterion_1();
    report(1, "example table by the integral formulas", &c1);
    let (c2, intersections) = criterion_2();
    report(2, "developable intersection counts", &c2);
    let c3 = criterion_3(&integrals, &intersections);
    report(3, "limit, integral and intersection agree", &c3);
    let c4 = criterion_4();
    report(4, "R³ oracles", &c4);
    let c5 = criterion_5();
    report(5, "property suites", &c5);
    let c6 = criterion_6();
    report(6, "negative paths", &c6);
    for o in [&c1, &c2, &c3, &c4, &c5, &c6] {
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
