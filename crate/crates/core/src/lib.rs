//! Numerical laboratory for bistable reaction–diffusion fronts meeting a
//! compactly supported drift.
//!
//! The crate models `u_t - u_xx + k(x) u_x = f(u)` on the line, with `f`
//! bistable and `k ≥ 0` supported in `[-x0, 0]`. It provides the traveling
//! wave of the drift-free problem, a checkable sufficient condition for the
//! drift to block the wave, a numerical supersolution that certifies the
//! block, and a time-dependent simulator with diagnostics.

pub mod numerics;
pub mod nonlinearity;
pub mod parallel;
pub mod drift;
pub mod wave;
pub mod fv;
pub mod supersolution;
pub mod simulator;

pub use nonlinearity::{make_cubic, BlockingConstants, Nonlinearity, Reaction};
