//! Linking and self-linking numbers of closed curves in Rⁿ measured
//! through a rank-3 oriented vector bundle along the curve.

pub mod bundles;
pub mod curves;
pub mod error;
pub mod frames;
pub mod linking;
pub mod numerics;
pub mod selflinking;

pub use curves::{arclength_jet, arclength_table, ArcLengthTable, Jet, TrigCurve, TrigPoly};
pub use error::{Error, Result};
pub use frames::{
    complete_orientation, fiber_cross, frenet, gram_schmidt, partial_frenet, Frame3,
    FrenetApparatus,
};

/// Column vector in Rⁿ.
pub type Vector = nalgebra::DVector<f64>;
