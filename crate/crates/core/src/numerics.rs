//! Periodic quadrature on the circle and torus, adaptive Gauss–Kronrod,
//! and Newton root finding on the torus seeded by a grid scan.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset grid on the torus: nodes `((i + offset) h, (j + offset) h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub offset: f64,
}

impl TorusGrid {
    /// `n` must be a power of two, at least 16.
    pub fn new(n: usize) -> Result<TorusGrid> {
        TorusGrid::with_offset(n, 0.5)
    }

    pub fn with_offset(n: usize, offset: f64) -> Result<TorusGrid> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two ≥ 16, got {n}"
            )));
        }
        if !(0.0..1.0).contains(&offset) {
            return Err(Error::InvalidArgument(format!(
                "grid offset must lie in [0, 1), got {offset}"
            )));
        }
        Ok(TorusGrid { n, offset })
    }

    pub fn step(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + self.offset) * self.step()
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Offset midpoint rule on the torus.
///
/// The error estimate compares with the rule on every other node in each
/// axis, which is itself an offset rule of half the size.
pub fn torus_integral<F>(f: F, grid: TorusGrid) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let n = grid.n;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let t = grid.node(i);
            let mut full = 0.0;
            let mut half = 0.0;
            for j in 0..n {
                let s = grid.node(j);
                let v = f(t, s)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { t, s });
                }
                full += v;
                if i % 2 == 0 && j % 2 == 0 {
                    half += v;
                }
            }
            Ok((full, half))
        })
        .collect::<Result<_>>()?;
    let h = grid.step();
    let full: f64 = rows.iter().map(|r| r.0).sum::<f64>() * h * h;
    let half: f64 = rows.iter().map(|r| r.1).sum::<f64>() * 4.0 * h * h;
    Ok(Quadrature {
        value: full,
        error_estimate: (full - half).abs(),
        evaluations: n * n,
    })
}

/// Trapezoid rule on `n` uniform nodes of the circle.
pub fn circle_integral<F>(f: F, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument(
            "circle grid must be nonempty".into(),
        ));
    }
    let h = TAU / n as f64;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * h;
            let v = f(t)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { t, s: t })
            }
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(sum * h)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x)? + f(c + x)?;
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    if !k.is_finite() {
        return Err(Error::NonFinite { t: c, s: f64::NAN });
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Settings for [`adaptive_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Equal pieces the interval is cut into before adapting.
    pub initial_pieces: usize,
    pub max_intervals: usize,
    /// For [`nested_torus_integral`]: when positive, extra breakpoints at
    /// `±g, ±2g, ±4g, …` around the diagonal, so features as narrow as `g`
    /// there are bracketed from the start.
    #[serde(default)]
    pub diagonal_grading: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            initial_pieces: 16,
            max_intervals: 4000,
            diagonal_grading: 0.0,
        }
    }
}

/// Globally adaptive 7/15-point Gauss–Kronrod quadrature on `[a, b]`.
///
/// Nodes never touch the endpoints, so integrands may be undefined there.
/// An interval whose bisection neither lowers the error estimate nor moves
/// the value is at the roundoff floor and is not split again; below a
/// relative width of 1e−6 a stalled error estimate alone is enough.
pub fn adaptive_integral<F>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64>,
{
    let pieces = opts.initial_pieces.max(1);
    let w = (b - a) / pieces as f64;
    let breaks: Vec<f64> = (0..=pieces)
        .map(|i| if i == pieces { b } else { a + i as f64 * w })
        .collect();
    adaptive_integral_breaks(f, &breaks, opts)
}

/// [`adaptive_integral`] starting from the pieces between consecutive
/// `breaks` (increasing, at least two) instead of equal pieces.
pub fn adaptive_integral_breaks<F>(
    f: F,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64>,
{
    struct Piece {
        lo: f64,
        hi: f64,
        value: f64,
        error: f64,
        settled: bool,
    }
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument(
            "adaptive quadrature needs at least one piece".into(),
        ));
    }
    let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
    let pieces = breaks.len() - 1;
    let mut intervals = Vec::with_capacity(pieces * 4);
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (value, error) = kronrod15(&f, lo, hi)?;
        intervals.push(Piece {
            lo,
            hi,
            value,
            error,
            settled: false,
        });
    }
    let mut evaluations = 15 * pieces;
    loop {
        let value: f64 = intervals.iter().map(|x| x.value).sum();
        let error: f64 = intervals.iter().map(|x| x.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        let worst = intervals
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.settled)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(idx) = worst.filter(|_| error > target) else {
            return Ok(Quadrature {
                value,
                error_estimate: error,
                evaluations,
            });
        };
        if intervals.len() >= opts.max_intervals {
            return Err(Error::Quadrature { a, b, error });
        }
        let p = intervals.swap_remove(idx);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(Error::Quadrature { a, b, error });
        }
        let (v1, e1) = kronrod15(&f, p.lo, mid)?;
        let (v2, e2) = kronrod15(&f, mid, p.hi)?;
        evaluations += 30;
        let width = (p.hi - p.lo) / (b - a).abs();
        let stalled = e1 + e2 >= 0.99 * p.error
            && ((v1 + v2 - p.value).abs() <= 1e-5 * (v1 + v2).abs().max(p.error) || width < 1e-6);
        let settled = stalled || width < 1e-12;
        intervals.push(Piece {
            lo: p.lo,
            hi: mid,
            value: v1,
            error: e1,
            settled,
        });
        intervals.push(Piece {
            lo: mid,
            hi: p.hi,
            value: v2,
            error: e2,
            settled,
        });
    }
}

/// A Poisson-kernel bump in a node density on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    /// Approximate half-width of the concentrated region.
    pub width: f64,
    /// Mass relative to the uniform background.
    pub mass: f64,
}

impl Bump {
    fn radius(&self) -> f64 {
        (1.0 - self.width).clamp(0.0, 0.999_999)
    }

    /// Poisson kernel normalized to mean 1 over the circle.
    fn density(&self, x: f64) -> f64 {
        let r = self.radius();
        (1.0 - r * r) / (1.0 - 2.0 * r * (x - self.center).cos() + r * r)
    }

    /// `∫_0^x density`, continuous in `x` and increasing by `2π` per turn.
    fn cumulative(&self, x: f64) -> f64 {
        let r = self.radius();
        let q = (1.0 + r) / (1.0 - r);
        let m = |y: f64| y + 2.0 * ((q - 1.0) * y.sin()).atan2((q + 1.0) - (q - 1.0) * y.cos());
        m(x - self.center) - m(-self.center)
    }
}

/// Nodes and weights of a periodic rule on `[0, 2π)`.
///
/// Built as the trapezoid rule in a variable `u = U(s)`, where `U` is the
/// normalized cumulative density `1 + Σ bumps`, so the rule stays spectrally
/// accurate for smooth periodic integrands while packing nodes near bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PeriodicRule {
    pub fn uniform(n: usize, offset: f64) -> PeriodicRule {
        let h = TAU / n as f64;
        PeriodicRule {
            nodes: (0..n).map(|i| (i as f64 + offset) * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn clustered(n: usize, offset: f64, bumps: &[Bump]) -> PeriodicRule {
        if bumps.is_empty() {
            return PeriodicRule::uniform(n, offset);
        }
        let total = 1.0 + bumps.iter().map(|b| b.mass).sum::<f64>();
        let density =
            |x: f64| (1.0 + bumps.iter().map(|b| b.mass * b.density(x)).sum::<f64>()) / total;
        let cumulative =
            |x: f64| (x + bumps.iter().map(|b| b.mass * b.cumulative(x)).sum::<f64>()) / total;
        let h = TAU / n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut lo = 0.0;
        for i in 0..n {
            let u = (i as f64 + offset) * h;
            let x = invert_monotone(&cumulative, &density, u, lo, TAU);
            nodes.push(x);
            weights.push(h / density(x));
            lo = x;
        }
        PeriodicRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Every other node with doubled weights: the same construction at half size.
    pub fn half(&self) -> PeriodicRule {
        PeriodicRule {
            nodes: self.nodes.iter().step_by(2).copied().collect(),
            weights: self.weights.iter().step_by(2).map(|w| 2.0 * w).collect(),
        }
    }
}

/// Solves `g(x) = u` for increasing `g` on `[lo, hi]` by safeguarded Newton.
fn invert_monotone(
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    u: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = g(x) - u;
        if r.abs() < 1e-15 {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = x - r / dg(x);
        x = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    x
}

/// Double integral over the torus: periodic `rule` in `s`, adaptive
/// Gauss–Kronrod in the offset `h = t − s` over `(−π, 0)` and `(0, π)`.
///
/// `f(s, h)` is the integrand at `(t, s) = (s + h, s)`. Splitting at the
/// diagonal keeps full accuracy for integrands that are smooth on the strip
/// `0 < s − t < 2π` but only piecewise smooth across `s = t`, and passing the
/// offset itself lets callers form short chords without cancellation. The
/// error estimate adds the inner estimates to the difference against the
/// half-size outer rule.
pub fn nested_torus_integral<F>(
    f: F,
    rule: &PeriodicRule,
    inner: AdaptiveOptions,
) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    // breakpoints on (0, π); mirrored for (−π, 0)
    let pieces = inner.initial_pieces.div_ceil(2).max(1);
    let mut ahead_breaks: Vec<f64> = (0..=pieces)
        .map(|i| PI * i as f64 / pieces as f64)
        .collect();
    if inner.diagonal_grading > 0.0 {
        let mut g = inner.diagonal_grading;
        while g < ahead_breaks[1] {
            ahead_breaks.push(g);
            g *= 2.0;
        }
        ahead_breaks.sort_by(f64::total_cmp);
    }
    let behind_breaks: Vec<f64> = ahead_breaks.iter().rev().map(|x| -x).collect();
    let columns: Vec<Quadrature> = rule
        .nodes
        .par_iter()
        .map(|&s| -> Result<Quadrature> {
            let behind = adaptive_integral_breaks(|h| f(s, h), &behind_breaks, inner)?;
            let ahead = adaptive_integral_breaks(|h| f(s, h), &ahead_breaks, inner)?;
            Ok(Quadrature {
                value: behind.value + ahead.value,
                error_estimate: behind.error_estimate + ahead.error_estimate,
                evaluations: behind.evaluations + ahead.evaluations,
            })
        })
        .collect::<Result<_>>()?;
    let value: f64 = columns
        .iter()
        .zip(&rule.weights)
        .map(|(q, w)| q.value * w)
        .sum();
    let half: f64 = columns
        .iter()
        .zip(&rule.weights)
        .step_by(2)
        .map(|(q, w)| 2.0 * q.value * w)
        .sum();
    let inner_err: f64 = columns
        .iter()
        .zip(&rule.weights)
        .map(|(q, w)| q.error_estimate * w)
        .sum();
    Ok(Quadrature {
        value,
        error_estimate: (value - half).abs() + inner_err,
        evaluations: columns.iter().map(|q| q.evaluations).sum(),
    })
}

/// Shape of the second coordinate of a root problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SecondAxis {
    /// `s` on the circle.
    Periodic,
    /// `d = s − t` on the open interval `(0, 2π)`.
    OffDiagonal,
}

/// Settings for [`find_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Scan resolution per axis.
    pub seeds: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub dedupe: f64,
    /// Roots with `|s − t| mod 2π` below this are dropped when
    /// `discard_diagonal` is set.
    pub diagonal: f64,
    pub discard_diagonal: bool,
    pub transversality_floor: f64,
    pub second_axis: SecondAxis,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            seeds: 128,
            tol: 1e-9,
            max_iter: 50,
            fd_step: 1e-6,
            dedupe: 1e-4,
            diagonal: 1e-3,
            discard_diagonal: false,
            transversality_floor: 1e-6,
            second_axis: SecondAxis::Periodic,
        }
    }
}

/// A polished root. `location` is `(t, s)` or `(t, s, λ)` with `s` in
/// `[0, 2π)` regardless of how the problem parameterized it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub location: Vec<f64>,
    pub residual: f64,
    pub jacobian_det: f64,
    pub newton_iters: usize,
}

impl RootRecord {
    pub fn t(&self) -> f64 {
        self.location[0]
    }

    pub fn s(&self) -> f64 {
        self.location[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    pub roots: Vec<RootRecord>,
    /// Flagged cells whose Newton iteration did not converge.
    pub warnings: Vec<String>,
    pub flagged_cells: usize,
    pub discarded_diagonal: usize,
    pub seeds: usize,
}

/// A square system on the torus (optionally times ℝ).
///
/// The system is evaluated in the problem's own coordinates: `(t, s)` for a
/// periodic second axis, `(t, d)` with `d = s − t ∈ (0, 2π)` otherwise; a
/// third coordinate, if present, is free and initialized by `extra`.
pub struct RootProblem<'a> {
    pub dim: usize,
    pub system: &'a (dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    pub extra: Option<&'a (dyn Fn(f64, f64) -> Result<f64> + Sync)>,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn jacobian(problem: &RootProblem, u: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = problem.dim;
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m {
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[k] += h;
        um[k] -= h;
        let fp = (problem.system)(&up)?;
        let fm = (problem.system)(&um)?;
        for i in 0..m {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Damped Newton with finite-difference Jacobian.
fn newton(
    problem: &RootProblem,
    start: Vec<f64>,
    opts: &RootOptions,
) -> Result<Option<(Vec<f64>, f64, usize)>> {
    let mut u = start;
    let mut f = (problem.system)(&u)?;
    let mut r = max_norm(&f);
    for iter in 0..=opts.max_iter {
        if r < opts.tol {
            return Ok(Some((u, r, iter)));
        }
        if iter == opts.max_iter {
            break;
        }
        let j = jacobian(problem, &u, opts.fd_step)?;
        let Some(step) = j.lu().solve(&DVector::from_column_slice(&f)) else {
            return Ok(None);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(x, d)| x - lambda * d)
                .collect();
            if opts.second_axis == SecondAxis::OffDiagonal && !(trial[1] > 0.0 && trial[1] < TAU) {
                lambda *= 0.5;
                continue;
            }
            let ft = (problem.system)(&trial)?;
            let rt = max_norm(&ft);
            if rt.is_finite() && rt < r {
                u = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(None);
        }
    }
    Ok(None)
}

fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    let wrap = |x: f64| {
        let d = x.rem_euclid(TAU);
        d.min(TAU - d)
    };
    let mut d = wrap(a[0] - b[0]).max(wrap(a[1] - b[1]));
    for k in 2..a.len() {
        d = d.max((a[k] - b[k]).abs());
    }
    d
}

/// Grid scan plus damped Newton.
///
/// A cell is flagged when every component of the system takes both signs
/// (or vanishes) at its four corners. Converged roots are deduplicated,
/// sorted by `(t, s)`, optionally stripped of diagonal roots, and checked
/// against the transversality floor.
pub fn find_roots(problem: &RootProblem, opts: &RootOptions) -> Result<RootScan> {
    if problem.dim < 2 || problem.dim > 3 || (problem.dim == 3) != problem.extra.is_some() {
        return Err(Error::InvalidArgument(
            "root problems have 2 unknowns, or 3 with an initializer for the third".into(),
        ));
    }
    let n = opts.seeds;
    if n < 4 {
        return Err(Error::InvalidArgument(format!("seed grid {n} too small")));
    }
    let h = TAU / n as f64;
    let (rows, second): (usize, Box<dyn Fn(usize) -> f64 + Sync>) = match opts.second_axis {
        SecondAxis::Periodic => (n, Box::new(move |j| j as f64 * h)),
        // interior points only, corners at (j + ½) h
        SecondAxis::OffDiagonal => (n, Box::new(move |j| (j as f64 + 0.5) * h)),
    };
    let point = |i: usize, j: usize| -> Result<Vec<f64>> {
        let t = i as f64 * h;
        let x = second(j);
        let mut u = vec![t, x];
        if let Some(extra) = problem.extra {
            u.push(extra(t, x)?);
        }
        Ok(u)
    };
    let cols = match opts.second_axis {
        SecondAxis::Periodic => n,
        SecondAxis::OffDiagonal => n - 1,
    };
    let samples: Vec<Vec<Vec<f64>>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let u = point(i, j)?;
                    (problem.system)(&u)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut flagged = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let corners = [
                &samples[i][j],
                &samples[(i + 1) % rows][j],
                &samples[i][(j + 1) % n],
                &samples[(i + 1) % rows][(j + 1) % n],
            ];
            let straddles = (0..problem.dim).all(|k| {
                let lo = corners.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min);
                let hi = corners
                    .iter()
                    .map(|c| c[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            });
            if straddles {
                flagged.push((i, j));
            }
        }
    }
    let outcomes: Vec<(usize, usize, Option<(Vec<f64>, f64, usize)>)> = flagged
        .par_iter()
        .map(|&(i, j)| -> Result<_> {
            let mut u = point(i, j)?;
            u[0] += 0.5 * h;
            u[1] += 0.5 * h;
            if let Some(extra) = problem.extra {
                u[2] = extra(u[0], u[1])?;
            }
            Ok((i, j, newton(problem, u, opts)?))
        })
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let mut found: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    for (i, j, outcome) in outcomes {
        match outcome {
            Some((mut u, r, it)) => {
                if opts.second_axis == SecondAxis::OffDiagonal {
                    // report s, keep d for the Jacobian below
                    u[1] += u[0];
                }
                u[0] = u[0].rem_euclid(TAU);
                u[1] = u[1].rem_euclid(TAU);
                if !found
                    .iter()
                    .any(|(v, _, _)| torus_distance(v, &u) < opts.dedupe)
                {
                    found.push((u, r, it));
                }
            }
            None => warnings.push(format!(
                "Newton did not converge from cell t ∈ [{:.4}, {:.4}], {} ∈ [{:.4}, {:.4}]",
                i as f64 * h,
                (i + 1) as f64 * h,
                if opts.second_axis == SecondAxis::Periodic {
                    "s"
                } else {
                    "s − t"
                },
                second(j),
                second(j) + h
            )),
        }
    }
    let mut roots = Vec::new();
    let mut discarded = 0;
    for (u, residual, newton_iters) in found {
        let d = (u[1] - u[0]).rem_euclid(TAU);
        if opts.discard_diagonal && d.min(TAU - d) < opts.diagonal {
            discarded += 1;
            continue;
        }
        let mut native = u.clone();
        if opts.second_axis == SecondAxis::OffDiagonal {
            native[1] = d;
        }
        let det = jacobian(problem, &native, opts.fd_step)?.determinant();
        if det.abs() < opts.transversality_floor {
            return Err(Error::Transversality {
                t: u[0],
                s: u[1],
                det: det.abs(),
                floor: opts.transversality_floor,
            });
        }
        roots.push(RootRecord {
            location: u,
            residual,
            jacobian_det: det,
            newton_iters,
        });
    }
    roots.sort_by(|a, b| a.t().total_cmp(&b.t()).then(a.s().total_cmp(&b.s())));
    Ok(RootScan {
        roots,
        warnings,
        flagged_cells: flagged.len(),
        discarded_diagonal: discarded,
        seeds: n,
    })
}

/// Runs [`find_roots`] at `seeds` and `2 · seeds` and requires the same
/// root set (within 1e−6) from both.
pub fn find_roots_stable(problem: &RootProblem, opts: &RootOptions) -> Result<RootScan> {
    let coarse = find_roots(problem, opts)?;
    let fine = find_roots(
        problem,
        &RootOptions {
            seeds: 2 * opts.seeds,
            ..*opts
        },
    )?;
    let same = coarse.roots.len() == fine.roots.len()
        && coarse.roots.iter().all(|r| {
            fine.roots
                .iter()
                .any(|q| torus_distance(&r.location, &q.location) < 1e-6)
        });
    if !same {
        return Err(Error::RootCountUnstable {
            coarse: coarse.roots.len(),
            fine: fine.roots.len(),
        });
    }
    Ok(fine)
}

/// `2 sin((s − t)/2)`: vanishes to first order on the diagonal, positive on
/// the strip `t < s < t + 2π`.
pub fn diagonal_factor(t: f64, s: f64) -> f64 {
    2.0 * (0.5 * (s - t)).sin()
}

/// Nearest integer and distance to it.
pub fn nearest_integer(raw: f64) -> (i64, f64) {
    let v = raw.round();
    (v as i64, (raw - v).abs())
}
