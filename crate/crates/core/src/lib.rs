//! Optimal quasiminimizing constants of piecewise linear and power-type
//! functions on intervals, blowup bounds for minima of quasisuperminimizers,
//! and the pasting-lemma constructions that show those bounds are sharp.
//!
//! Everything here is one-dimensional: functions live on closed intervals of
//! the real line and the p-energy of `u` on `(a, b)` is `∫ |u'|^p`.

pub mod bounds;
pub mod corner;
pub mod error;
pub mod lp_blowup;
pub mod numerics;
pub mod pasting;
pub mod power;
pub mod pwl;
pub mod tables;

pub use error::{QmError, Result};
pub use numerics::ToleranceConfig;
pub use pwl::PiecewiseLinearFn;
