//! Dense reverse-mode automatic differentiation.
//!
//! A [`Tape`] records matrix operations on values read from a
//! [`ParamStore`]; [`Tape::backward`] accumulates gradients back into the
//! store, and [`ParamStore::sgd_step`] applies them. Only the handful of
//! operations the forecasting models need are provided.

mod matrix;
mod params;
mod tape;

pub mod gradcheck;

pub use matrix::Matrix;
pub use params::{ParamId, ParamStore, Parameter};
pub use tape::{symmetric_part, Tape, Var};
