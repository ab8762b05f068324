use thiserror::Error;

/// Every failure the library reports.
///
/// Variants that concern a location on the torus carry the offending
/// `(t, s)` so callers can render it; regularity problems are reported,
/// never silently absorbed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve dimension must be at least 3, got {0}")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown preset `{0}` (known: example1, example2)")]
    UnknownPreset(String),

    #[error("curve spec: {0}")]
    Spec(String),

    #[error("vanishing speed at t = {t} (|α'| = {speed:e})")]
    VanishingSpeed { t: f64, speed: f64 },

    #[error("rank deficiency at input vector {index}: residual norm {residual:e}")]
    RankDeficient { index: usize, residual: f64 },

    #[error("degenerate frame at t = {t}: vector {index} has residual norm {residual:e}")]
    DegenerateFrame { t: f64, index: usize, residual: f64 },

    #[error("input vectors are not orthonormal (Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("non-finite integrand sample at (t, s) = ({t}, {s})")]
    NonFinite { t: f64, s: f64 },

    #[error("curves meet: |β(s) − α(t)| = {distance:e} at (t, s) = ({t}, {s})")]
    CurvesIntersect { t: f64, s: f64, distance: f64 },

    #[error("regularity violation at (t, s) = ({t}, {s}): chord lies in the fiber's orthogonal complement (|n_t δ| = {norm:e})")]
    FiberOrthogonal { t: f64, s: f64, norm: f64 },

    #[error("raw value {raw} is {residual:.3e} away from the nearest integer; refusing to round")]
    ResidualTooLarge { raw: f64, residual: f64 },

    #[error("transversality failure at (t, s) = ({t}, {s}): |det J| = {det:e} is below the floor {floor:e}")]
    Transversality {
        t: f64,
        s: f64,
        det: f64,
        floor: f64,
    },

    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error(
        "push-off limit unstable: δ = {delta_a:e} gives {raw_a}, δ = {delta_b:e} gives {raw_b}"
    )]
    UnstableLimit {
        delta_a: f64,
        raw_a: f64,
        delta_b: f64,
        raw_b: f64,
    },

    #[error("regularity conditions fail: {0}")]
    Conditions(String),

    #[error("cross-validation mismatch: primary raw {primary}, closed-form raw {secondary} (tolerance {tolerance:e})")]
    CrossValidation {
        primary: f64,
        secondary: f64,
        tolerance: f64,
    },

    #[error(
        "diagonal degeneracy at t = {t}: fiber cross product of the push-off derivatives vanishes"
    )]
    DiagonalDegeneracy { t: f64 },

    #[error("intersection at (t, s) = ({t}, {s}) lies on the singular locus of the developable (x = {coordinate:e})")]
    SingularLocus { t: f64, s: f64, coordinate: f64 },

    #[error("root set changed between seed resolutions: {coarse} roots vs {fine} roots")]
    RootCountUnstable { coarse: usize, fine: usize },

    #[error(
        "adaptive quadrature did not reach tolerance on [{a}, {b}] (estimated error {error:e})"
    )]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
