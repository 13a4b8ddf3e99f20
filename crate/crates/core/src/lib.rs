//! Simulator and verification harness for the coupled nonlinear
//! Schrödinger–inviscid Burgers system
//!
//! ```text
//! i u_t + u_xx = v u - ε|u|²u,    v_t + (v²)_x = ε(|u|²)_x
//! ```
//!
//! and its linearization around the entropy shock `(e^{ibt} r, φ)`, whose
//! long-wave component is a measure `v = ṽ + Ψ(t) δ_{x=0}`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod numerics;
pub mod reference;
pub mod parallel;
pub mod schrodinger;
pub mod hyperbolic;
pub mod coupled;
pub mod harness;

pub use error::{Error, Result};
pub use numerics::{ComplexField, Grid1D, RealField, TimeSeries, C64};
pub use reference::{ReferenceWave, WaveParams};
