//! Iterative solution of boundary integral equations and convergence
//! studies.

mod bvp;
mod gmres;
mod study;

pub use bvp::*;
pub use gmres::{gmres, GmresOptions, GmresResult};
pub use study::*;
