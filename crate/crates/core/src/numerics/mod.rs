//! Numerical building blocks shared by the solvers.

pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod smooth;
pub mod spline;
pub mod tridiag;
