//! Orthonormal frames along a curve: Gram–Schmidt, Frenet apparatus,
//! orientation completion and the cross product inside a 3-dimensional fiber.

use nalgebra::{DMatrix, Vector3};

use crate::curves::{Jet, TrigCurve};
use crate::error::{Error, Result};
use crate::Vector;

/// Relative residual below which Gram–Schmidt reports rank deficiency.
pub const RANK_TOL: f64 = 1e-9;

/// Gram–Schmidt with one reorthogonalization pass.
///
/// Returns the orthonormal vectors and the residual norms `r_ii` (the
/// diagonal of the triangular change of basis).
pub fn gram_schmidt_with_norms(vectors: &[Vector]) -> Result<(Vec<Vector>, Vec<f64>)> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    let mut norms = Vec::with_capacity(vectors.len());
    if let Some(first) = vectors.first() {
        if vectors.len() > first.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors cannot be independent in R^{}",
                vectors.len(),
                first.len()
            )));
        }
    }
    for (index, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let r = w.norm();
        if !(r > RANK_TOL * v.norm()) || r == 0.0 {
            return Err(Error::RankDeficient { index, residual: r });
        }
        out.push(w / r);
        norms.push(r);
    }
    Ok((out, norms))
}

/// Orthonormalizes `vectors`, preserving the flag they span.
pub fn gram_schmidt(vectors: &[Vector]) -> Result<Vec<Vector>> {
    gram_schmidt_with_norms(vectors).map(|(q, _)| q)
}

/// Largest entry of `|QᵀQ − I|`.
pub fn orthonormality_defect(vectors: &[Vector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((u.dot(v) - target).abs());
        }
    }
    worst
}

/// The unit vector `f` orthogonal to `n−1` orthonormal vectors in Rⁿ with
/// `det(partial, f) = +1`, by cofactor expansion along the last row.
pub fn complete_orientation(partial: &[Vector]) -> Result<Vector> {
    let n = partial.len() + 1;
    if partial.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "completion needs {} vectors of length {}",
            n - 1,
            n
        )));
    }
    let deviation = orthonormality_defect(partial);
    if deviation > 1e-8 {
        return Err(Error::NotOrthonormal { deviation });
    }
    let rows = DMatrix::from_fn(n - 1, n, |i, j| partial[i][j]);
    let mut f = Vector::zeros(n);
    for j in 0..n {
        let minor = rows.clone().remove_column(j);
        let sign = if (n - 1 + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        f[j] = sign * minor.determinant();
    }
    Ok(f)
}

/// Determinant of the matrix whose columns are `cols`.
pub fn det_columns(cols: &[&Vector]) -> f64 {
    let n = cols.len();
    DMatrix::from_fn(n, n, |i, j| cols[j][i]).determinant()
}

/// An ordered orthonormal triple in Rⁿ, oriented by its order.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame3 {
    basis: [Vector; 3],
}

impl Frame3 {
    /// Validates orthonormality within 1e−10.
    pub fn new(b1: Vector, b2: Vector, b3: Vector) -> Result<Self> {
        if b2.len() != b1.len() || b3.len() != b1.len() {
            return Err(Error::DimensionMismatch {
                expected: b1.len(),
                got: if b2.len() != b1.len() {
                    b2.len()
                } else {
                    b3.len()
                },
            });
        }
        let frame = Frame3 {
            basis: [b1, b2, b3],
        };
        let deviation = orthonormality_defect(&frame.basis);
        if deviation > 1e-10 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(frame)
    }

    /// Skips the orthonormality check; callers guarantee it.
    pub(crate) fn new_unchecked(basis: [Vector; 3]) -> Self {
        Frame3 { basis }
    }

    /// Gram–Schmidt of three spanning vectors.
    pub fn orthonormalize(u: &Vector, v: &Vector, w: &Vector) -> Result<Self> {
        let q = gram_schmidt(&[u.clone(), v.clone(), w.clone()])?;
        let [a, b, c]: [Vector; 3] = q.try_into().expect("three vectors in, three out");
        Ok(Frame3 { basis: [a, b, c] })
    }

    pub fn basis(&self) -> &[Vector; 3] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Coordinates of the fiber projection of `x`.
    pub fn coords(&self, x: &Vector) -> Vector3<f64> {
        Vector3::new(
            self.basis[0].dot(x),
            self.basis[1].dot(x),
            self.basis[2].dot(x),
        )
    }

    pub fn from_coords(&self, c: &Vector3<f64>) -> Vector {
        &self.basis[0] * c[0] + &self.basis[1] * c[1] + &self.basis[2] * c[2]
    }

    /// Orthogonal projection of `x` onto the fiber.
    pub fn project(&self, x: &Vector) -> Vector {
        self.from_coords(&self.coords(x))
    }

    /// `P = Σ b_i b_iᵀ`.
    pub fn projection_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut p = DMatrix::zeros(n, n);
        for b in &self.basis {
            p.ger(1.0, b, b, 1.0);
        }
        p
    }

    /// Recombines the basis with a 3×3 matrix: `b′_j = Σ_i r_ij b_i`.
    pub fn rotated(&self, r: &nalgebra::Matrix3<f64>) -> Frame3 {
        let col = |j: usize| {
            &self.basis[0] * r[(0, j)] + &self.basis[1] * r[(1, j)] + &self.basis[2] * r[(2, j)]
        };
        Frame3 {
            basis: [col(0), col(1), col(2)],
        }
    }
}

/// Cross product of the fiber components of `u` and `v`, returned in Rⁿ.
pub fn fiber_cross(frame: &Frame3, u: &Vector, v: &Vector) -> Vector {
    frame.from_coords(&frame.coords(u).cross(&frame.coords(v)))
}

/// Frenet data at one parameter value.
///
/// `frame` holds `f_1..f_m` and `curvatures` holds `κ_1..κ_{m−1}` in the
/// arc-length normalization, so that `f_i′ = ‖α′‖(−κ_{i−1} f_{i−1} + κ_i f_{i+1})`.
/// For the full apparatus `m = n` and `κ_{n−1}` may be negative.
#[derive(Debug, Clone)]
pub struct FrenetApparatus {
    pub t: f64,
    pub frame: Vec<Vector>,
    pub curvatures: Vec<f64>,
    pub speed: f64,
    /// Gram–Schmidt residual norms of `α′, α″, …`.
    pub residuals: Vec<f64>,
    /// Jet of the curve up to the order used.
    pub jet: Jet,
}

impl FrenetApparatus {
    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    /// `f_i` with 1-based index.
    pub fn f(&self, i: usize) -> &Vector {
        &self.frame[i - 1]
    }

    /// `κ_i` with 1-based index.
    pub fn kappa(&self, i: usize) -> f64 {
        self.curvatures[i - 1]
    }

    /// Exact `d f_i / dt` (1-based `i`).
    ///
    /// For a partial frame the last vector also has a component outside
    /// the span, `(I − P) α^(m+1) / r_m`.
    pub fn derivative(&self, i: usize) -> Vector {
        let m = self.len();
        let n = self.frame[0].len();
        let mut d = Vector::zeros(n);
        if i > 1 {
            d.axpy(-self.speed * self.kappa(i - 1), self.f(i - 1), 1.0);
        }
        if i < m {
            d.axpy(self.speed * self.kappa(i), self.f(i + 1), 1.0);
        } else if m < n {
            d += self.outer_part(m + 1) / self.residuals[m - 1];
        }
        d
    }

    /// Component of `α^(j)` orthogonal to `span(f_1..f_m)`.
    pub fn outer_part(&self, j: usize) -> Vector {
        let mut w = self.jet.d(j).clone();
        for f in &self.frame {
            let c = f.dot(&w);
            w.axpy(-c, f, 1.0);
        }
        w
    }
}

/// First `m` Frenet vectors from `α′..α^(m)` and curvatures `κ_1..κ_{m−1}`.
pub fn partial_frenet(curve: &TrigCurve, t: f64, m: usize) -> Result<FrenetApparatus> {
    let jet = curve.eval_jet(t, m + 1);
    partial_frenet_from_jet(jet, m)
}

pub(crate) fn partial_frenet_from_jet(jet: Jet, m: usize) -> Result<FrenetApparatus> {
    let t = jet.t;
    let (frame, residuals) = gram_schmidt_with_norms(&jet.values[1..=m]).map_err(|e| match e {
        Error::RankDeficient { index, residual } => Error::DegenerateFrame {
            t,
            index: index + 1,
            residual,
        },
        other => other,
    })?;
    let speed = residuals[0];
    let curvatures = (0..m - 1)
        .map(|j| residuals[j + 1] / (residuals[j] * speed))
        .collect();
    Ok(FrenetApparatus {
        t,
        frame,
        curvatures,
        speed,
        residuals,
        jet,
    })
}

/// The full Frenet apparatus `f_1..f_n`, `κ_1..κ_{n−1}`.
pub fn frenet(curve: &TrigCurve, t: f64) -> Result<FrenetApparatus> {
    let n = curve.dim();
    let mut app = partial_frenet(curve, t, n - 1)?;
    let fn_ = complete_orientation(&app.frame)?;
    let last = app.jet.d(n).dot(&fn_) / (app.residuals[n - 2] * app.speed);
    app.frame.push(fn_);
    app.curvatures.push(last);
    Ok(app)
}
