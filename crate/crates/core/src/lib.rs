//! Quadrature by expansion for two-dimensional Helmholtz and Laplace layer
//! potentials, with panel discretizations of closed curves, an independent
//! adaptive-quadrature oracle and a Nyström/GMRES boundary value solver.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod oracle;
pub mod point;
pub mod potential;
pub mod qbx;
pub mod solve;
pub mod specfun;

pub use error::{QbxError, Result};
pub use num_complex::Complex64;
pub use point::Vec2;
