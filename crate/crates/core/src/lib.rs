//! Inverse kinematics, dynamics and tracking control for extensible
//! multi-segment soft arms modelled with piecewise constant curvature.

// `!(x > 0.0)` checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod ik;
pub mod optimize;
pub mod timing;
pub mod trajectory;

pub use error::{PccError, Result};
