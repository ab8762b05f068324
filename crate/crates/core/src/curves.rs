//! Closed curves with trigonometric-polynomial coordinates.
//!
//! Every coordinate is `c0 + Σ_k (a_k cos kt + b_k sin kt)` with period 2π,
//! so derivatives of any order are exact and closedness is structural.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::Vector;

/// One coordinate function: a constant plus finitely many harmonics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    constant: f64,
    /// harmonic index → (cos coefficient, sin coefficient); indices ≥ 1.
    harmonics: BTreeMap<u32, (f64, f64)>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            constant: c,
            harmonics: BTreeMap::new(),
        }
    }

    /// Adds `a cos(kt) + b sin(kt)`; `k = 0` folds `a` into the constant.
    pub fn with_term(mut self, k: u32, a: f64, b: f64) -> Self {
        self.add_term(k, a, b);
        self
    }

    pub fn add_term(&mut self, k: u32, a: f64, b: f64) {
        if k == 0 {
            self.constant += a;
            return;
        }
        let e = self.harmonics.entry(k).or_insert((0.0, 0.0));
        e.0 += a;
        e.1 += b;
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    /// Iterates `(k, a_k, b_k)` in increasing `k`.
    pub fn harmonics(&self) -> impl Iterator<Item = (u32, f64, f64)> + '_ {
        self.harmonics.iter().map(|(&k, &(a, b))| (k, a, b))
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.keys().next_back().copied().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.rem_euclid(TAU);
        self.harmonics
            .iter()
            .fold(self.constant, |acc, (&k, &(a, b))| {
                let (s, c) = (k as f64 * t).sin_cos();
                acc + a * c + b * s
            })
    }

    /// Derivatives of orders `0..=m` at `t`, written into `out`.
    fn eval_jet_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        out[0] = self.constant;
        let t = t.rem_euclid(TAU);
        for (&k, &(a0, b0)) in &self.harmonics {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            let (mut a, mut b) = (a0, b0);
            for v in out.iter_mut() {
                *v += a * c + b * s;
                // d/dt (a cos + b sin) = k b cos − k a sin
                (a, b) = (kf * b, -kf * a);
            }
        }
    }

    /// `p^(j)(t + h) − p^(j)(t)` for `j = 0..=m`, with full relative
    /// precision for small `h`.
    fn difference_jet_into(&self, t: f64, h: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mid = (t + 0.5 * h).rem_euclid(TAU);
        for (&k, &(a0, b0)) in &self.harmonics {
            let kf = k as f64;
            let (s, c) = (kf * mid).sin_cos();
            let half = 2.0 * (0.5 * kf * h).sin();
            let (mut a, mut b) = (a0, b0);
            for v in out.iter_mut() {
                *v += half * (b * c - a * s);
                (a, b) = (kf * b, -kf * a);
            }
        }
    }

    /// Exact `j`-th derivative as another trig polynomial.
    pub fn derivative(&self, j: u32) -> TrigPoly {
        let mut out = TrigPoly::constant(if j == 0 { self.constant } else { 0.0 });
        for (&k, &(a0, b0)) in &self.harmonics {
            let kf = k as f64;
            let (mut a, mut b) = (a0, b0);
            for _ in 0..j {
                (a, b) = (kf * b, -kf * a);
            }
            out.harmonics.insert(k, (a, b));
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> TrigPoly {
        TrigPoly {
            constant: self.constant * factor,
            harmonics: self
                .harmonics
                .iter()
                .map(|(&k, &(a, b))| (k, (a * factor, b * factor)))
                .collect(),
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out.constant += other.constant;
        for (k, a, b) in other.harmonics() {
            out.add_term(k, a, b);
        }
        out
    }

    /// `t ↦ p(−t)`: cosine terms are unchanged, sine terms flip.
    pub fn reversed(&self) -> TrigPoly {
        TrigPoly {
            constant: self.constant,
            harmonics: self
                .harmonics
                .iter()
                .map(|(&k, &(a, b))| (k, (a, -b)))
                .collect(),
        }
    }
}

/// A closed curve in Rⁿ, n ≥ 3, with period 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCurve {
    coords: Vec<TrigPoly>,
}

/// Position and derivatives `α(t), α′(t), …, α^(m)(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub t: f64,
    pub values: Vec<Vector>,
}

impl Jet {
    /// Highest derivative order held.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// The `j`-th derivative.
    pub fn d(&self, j: usize) -> &Vector {
        &self.values[j]
    }
}

impl TrigCurve {
    pub fn new(coords: Vec<TrigPoly>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::Dimension(coords.len()));
        }
        Ok(TrigCurve { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[TrigPoly] {
        &self.coords
    }

    pub fn max_harmonic(&self) -> u32 {
        self.coords
            .iter()
            .map(TrigPoly::max_harmonic)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> Vector {
        Vector::from_iterator(self.dim(), self.coords.iter().map(|p| p.eval(t)))
    }

    /// Exact jet of order `m` by term-wise differentiation.
    pub fn eval_jet(&self, t: f64, m: usize) -> Jet {
        let n = self.dim();
        let mut values = vec![Vector::zeros(n); m + 1];
        let mut buf = vec![0.0; m + 1];
        for (i, p) in self.coords.iter().enumerate() {
            p.eval_jet_into(t, &mut buf);
            for (j, v) in buf.iter().enumerate() {
                values[j][i] = *v;
            }
        }
        Jet { t, values }
    }

    /// Differences `α^(j)(t + h) − α^(j)(t)` for `j = 0..=m`.
    ///
    /// Computed from product formulas, so short chords keep full relative
    /// precision instead of cancelling.
    pub fn chord_jet(&self, t: f64, h: f64, m: usize) -> Jet {
        let n = self.dim();
        let mut values = vec![Vector::zeros(n); m + 1];
        let mut buf = vec![0.0; m + 1];
        for (i, p) in self.coords.iter().enumerate() {
            p.difference_jet_into(t, h, &mut buf);
            for (j, v) in buf.iter().enumerate() {
                values[j][i] = *v;
            }
        }
        Jet { t, values }
    }

    /// The single derivative `α^(j)(t)`.
    pub fn derivative_at(&self, t: f64, j: usize) -> Vector {
        self.eval_jet(t, j)
            .values
            .pop()
            .expect("jet is never empty")
    }

    /// The curve `α^(j)` as a trig polynomial.
    pub fn derivative_curve(&self, j: u32) -> TrigCurve {
        TrigCurve {
            coords: self.coords.iter().map(|p| p.derivative(j)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> TrigCurve {
        TrigCurve {
            coords: self.coords.iter().map(|p| p.scaled(factor)).collect(),
        }
    }

    pub fn translated(&self, offset: &Vector) -> Result<TrigCurve> {
        self.check_dim(offset.len())?;
        let mut out = self.clone();
        for (p, c) in out.coords.iter_mut().zip(offset.iter()) {
            p.constant += c;
        }
        Ok(out)
    }

    pub fn add(&self, other: &TrigCurve) -> Result<TrigCurve> {
        self.check_dim(other.dim())?;
        Ok(TrigCurve {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(p, q)| p.add(q))
                .collect(),
        })
    }

    /// Same image traversed backwards: `t ↦ α(−t)`.
    pub fn reversed(&self) -> TrigCurve {
        TrigCurve {
            coords: self.coords.iter().map(TrigPoly::reversed).collect(),
        }
    }

    /// Appends zero coordinates until the curve lives in `R^dim`.
    pub fn embedded(&self, dim: usize) -> Result<TrigCurve> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        let mut coords = self.coords.clone();
        coords.resize(dim, TrigPoly::default());
        Ok(TrigCurve { coords })
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// `(cos t, sin t, 0)` scaled by `radius` and shifted by `center`.
    pub fn circle(radius: f64, center: [f64; 3]) -> TrigCurve {
        TrigCurve {
            coords: vec![
                TrigPoly::constant(center[0]).with_term(1, radius, 0.0),
                TrigPoly::constant(center[1]).with_term(1, 0.0, radius),
                TrigPoly::constant(center[2]),
            ],
        }
    }

    /// First preset family in R⁴:
    /// `(cos(A+t) + sin²t, cos(A+2t), cos t, A sin(3t)/27)`.
    pub fn example1(a: f64) -> TrigCurve {
        let (sa, ca) = a.sin_cos();
        TrigCurve {
            coords: vec![
                TrigPoly::constant(0.5)
                    .with_term(1, ca, -sa)
                    .with_term(2, -0.5, 0.0),
                TrigPoly::default().with_term(2, ca, -sa),
                TrigPoly::default().with_term(1, 1.0, 0.0),
                TrigPoly::default().with_term(3, 0.0, a / 27.0),
            ],
        }
    }

    /// Second preset family in R⁴:
    /// `(−cos(A+t) + A sin(2t)/8, −A³cos(2t)/8 + sin(A+t), sin(5t)/125, A² sin(3t)/27)`.
    pub fn example2(a: f64) -> TrigCurve {
        let (sa, ca) = a.sin_cos();
        TrigCurve {
            coords: vec![
                TrigPoly::default()
                    .with_term(1, -ca, sa)
                    .with_term(2, 0.0, a / 8.0),
                TrigPoly::default()
                    .with_term(1, sa, ca)
                    .with_term(2, -a.powi(3) / 8.0, 0.0),
                TrigPoly::default().with_term(5, 0.0, 1.0 / 125.0),
                TrigPoly::default().with_term(3, 0.0, a * a / 27.0),
            ],
        }
    }

    pub fn from_preset(name: &str, a: f64) -> Result<TrigCurve> {
        match name {
            "example1" => Ok(TrigCurve::example1(a)),
            "example2" => Ok(TrigCurve::example2(a)),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Parses the curve-spec JSON format (explicit coefficients or a preset).
    pub fn from_json_str(text: &str) -> Result<TrigCurve> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Spec(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        TrigCurve::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<TrigCurve> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Spec("top level: expected an object".into()))?;
        if let Some(name) = obj.get("preset") {
            let name = name
                .as_str()
                .ok_or_else(|| Error::Spec("preset: expected a string".into()))?;
            let a = match obj.get("A") {
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::Spec("A: expected a number".into()))?,
                None => return Err(Error::Spec("A: missing preset parameter".into())),
            };
            for key in obj.keys() {
                if key != "preset" && key != "A" {
                    return Err(Error::Spec(format!("{key}: unexpected field")));
                }
            }
            return TrigCurve::from_preset(name, a);
        }
        let spec: CurveSpec = serde_json::from_value(value.clone())
            .map_err(|e| Error::Spec(format!("top level: {e}")))?;
        spec.into_curve()
    }

    /// The explicit-coefficient JSON form of this curve.
    pub fn to_spec(&self) -> CurveSpec {
        let coords = self
            .coords
            .iter()
            .map(|p| {
                let mut cos = BTreeMap::new();
                let mut sin = BTreeMap::new();
                for (k, a, b) in p.harmonics() {
                    if a != 0.0 {
                        cos.insert(k.to_string(), a);
                    }
                    if b != 0.0 {
                        sin.insert(k.to_string(), b);
                    }
                }
                CoordSpec {
                    constant: p.constant,
                    cos,
                    sin,
                }
            })
            .collect();
        CurveSpec {
            dim: self.dim(),
            coords,
        }
    }
}

/// Serialized form of an explicit curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub dim: usize,
    pub coords: Vec<CoordSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordSpec {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cos: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sin: BTreeMap<String, f64>,
}

impl CurveSpec {
    pub fn into_curve(self) -> Result<TrigCurve> {
        if self.coords.len() != self.dim {
            return Err(Error::Spec(format!(
                "coords: dim is {} but {} coordinates were given",
                self.dim,
                self.coords.len()
            )));
        }
        let mut polys = Vec::with_capacity(self.dim);
        for (i, c) in self.coords.iter().enumerate() {
            let mut p = TrigPoly::constant(c.constant);
            for (field, map, is_cos) in [("cos", &c.cos, true), ("sin", &c.sin, false)] {
                for (key, &coef) in map {
                    let k: u32 = key.parse().map_err(|_| {
                        Error::Spec(format!(
                            "coords[{i}].{field}[\"{key}\"]: harmonic key must be a non-negative integer"
                        ))
                    })?;
                    if !coef.is_finite() {
                        return Err(Error::Spec(format!(
                            "coords[{i}].{field}[\"{key}\"]: coefficient is not finite"
                        )));
                    }
                    if is_cos {
                        p.add_term(k, coef, 0.0);
                    } else if k > 0 {
                        p.add_term(k, 0.0, coef);
                    }
                }
            }
            polys.push(p);
        }
        TrigCurve::new(polys)
    }
}

/// Arc length `s(t)` of a curve and its inverse.
///
/// The speed is expanded in a Fourier series from `M` samples; `s(t)` is
/// its exact antiderivative, so lookups cost one series evaluation and the
/// inverse is a bracketed Newton solve seeded from a monotone table.
#[derive(Debug, Clone)]
pub struct ArcLengthTable {
    mean_speed: f64,
    /// (k, a_k, b_k) of the speed's Fourier series.
    modes: Vec<(f64, f64, f64)>,
    ts: Vec<f64>,
    ss: Vec<f64>,
    total: f64,
}

/// Builds the arc-length table from `m` speed samples.
pub fn arclength_table(curve: &TrigCurve, m: usize) -> Result<ArcLengthTable> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!(
            "arc-length grid needs at least 8 points, got {m}"
        )));
    }
    let h = TAU / m as f64;
    let speeds: Vec<f64> = (0..m)
        .map(|j| curve.derivative_at(j as f64 * h, 1).norm())
        .collect();
    let vmax = speeds.iter().cloned().fold(0.0, f64::max);
    for (j, &v) in speeds.iter().enumerate() {
        if !(v > 1e-12 * vmax.max(1e-300)) {
            return Err(Error::VanishingSpeed {
                t: j as f64 * h,
                speed: v,
            });
        }
    }
    let mean_speed = speeds.iter().sum::<f64>() / m as f64;
    let mut modes = Vec::new();
    for k in 1..m.div_ceil(2) {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, &v) in speeds.iter().enumerate() {
            let (s, c) = (k as f64 * j as f64 * h).sin_cos();
            a += v * c;
            b += v * s;
        }
        modes.push((k as f64, 2.0 * a / m as f64, 2.0 * b / m as f64));
    }
    let mut table = ArcLengthTable {
        mean_speed,
        modes,
        ts: Vec::new(),
        ss: Vec::new(),
        total: TAU * mean_speed,
    };
    let ts: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
    let ss: Vec<f64> = ts.iter().map(|&t| table.arclength_at(t)).collect();
    table.ts = ts;
    table.ss = ss;
    Ok(table)
}

impl ArcLengthTable {
    /// Total length `L = s(2π)`.
    pub fn total_length(&self) -> f64 {
        self.total
    }

    /// Speed reconstructed from the Fourier series.
    pub fn speed_at(&self, t: f64) -> f64 {
        self.modes.iter().fold(self.mean_speed, |acc, &(k, a, b)| {
            let (s, c) = (k * t).sin_cos();
            acc + a * c + b * s
        })
    }

    /// `s(t)`, with `s(t + 2π) = s(t) + L`.
    pub fn arclength_at(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .fold(self.mean_speed * t, |acc, &(k, a, b)| {
                let (s, c) = (k * t).sin_cos();
                acc + (a * s + b * (1.0 - c)) / k
            })
    }

    /// Inverse lookup `t(s)`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let winds = (s / self.total).floor();
        let s0 = s - winds * self.total;
        let i = self
            .ss
            .partition_point(|&x| x <= s0)
            .clamp(1, self.ss.len() - 1);
        let (mut lo, mut hi) = (self.ts[i - 1], self.ts[i]);
        let w = (s0 - self.ss[i - 1]) / (self.ss[i] - self.ss[i - 1]);
        let mut t = lo + w * (hi - lo);
        for _ in 0..60 {
            let f = self.arclength_at(t) - s0;
            if f.abs() <= 1e-15 * self.total {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = t - f / self.speed_at(t);
            t = if step > lo && step < hi {
                step
            } else {
                0.5 * (lo + hi)
            };
        }
        t + winds * TAU
    }
}

/// Jet of the arc-length reparameterization `γ(σ) = α(t(σ))` at `σ = s(t)`.
///
/// Uses `d/dσ = (1/‖α′‖) d/dt` applied to truncated Taylor series in `t`,
/// so the result is exact up to roundoff. Entry 0 is `α(t)`.
pub fn arclength_jet(curve: &TrigCurve, t: f64, m: usize) -> Result<Jet> {
    let n = curve.dim();
    // Taylor coefficients of α around t up to order 2m.
    let order = 2 * m + 1;
    let jet = curve.eval_jet(t, order);
    let mut fact = 1.0;
    let alpha: Vec<Vector> = jet
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            v / fact
        })
        .collect();
    // speed² series from the derivative series.
    let dalpha = series_derivative(&alpha);
    let len = dalpha.len();
    let mut sq = vec![0.0; len];
    for (i, item) in sq.iter_mut().enumerate() {
        *item = (0..=i).map(|j| dalpha[j].dot(&dalpha[i - j])).sum();
    }
    if sq[0] <= 0.0 {
        return Err(Error::VanishingSpeed { t, speed: 0.0 });
    }
    let inv_speed = series_inv_sqrt(&sq);
    let mut values = vec![jet.values[0].clone()];
    let mut current = alpha;
    for _ in 0..m {
        let d = series_derivative(&current);
        let l = d.len().min(inv_speed.len());
        let next: Vec<Vector> = (0..l)
            .map(|i| (0..=i).fold(Vector::zeros(n), |acc, j| acc + &d[j] * inv_speed[i - j]))
            .collect();
        values.push(next[0].clone());
        current = next;
    }
    Ok(Jet { t, values })
}

fn series_derivative(c: &[Vector]) -> Vec<Vector> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, v)| v * j as f64)
        .collect()
}

/// Series of `x^(-1/2)` given the series of `x` with `x[0] > 0`.
fn series_inv_sqrt(x: &[f64]) -> Vec<f64> {
    // y = x^(-1/2) satisfies 2 x y′ = −x′ y.
    let mut y = vec![0.0; x.len()];
    y[0] = x[0].powf(-0.5);
    for i in 1..x.len() {
        // coefficient of ε^(i−1) in 2 x y′ + x′ y = 0
        let mut acc = 0.0;
        for j in 0..i {
            // 2 x_{i−1−j} (j+1) y_{j+1} for j+1 < i, plus x′ y terms
            if j + 1 < i {
                acc += 2.0 * x[i - 1 - j] * (j + 1) as f64 * y[j + 1];
            }
            acc += (i - j) as f64 * x[i - j] * y[j];
        }
        y[i] = -acc / (2.0 * x[0] * i as f64);
    }
    y
}
