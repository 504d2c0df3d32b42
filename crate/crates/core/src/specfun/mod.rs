//! Special functions and polynomial quadrature tools.

mod bessel;
mod legendre;

pub use bessel::{bessel_j, bessel_j_seq, hankel01, hankel1, hankel1_seq, hankel1_seq_into, ASYMPTOTIC_THRESHOLD};
pub use legendre::{
    barycentric_weights, gauss_legendre, gauss_legendre_rule, legendre_coefficients,
    legendre_diff_matrix, legendre_eval, legendre_interp_matrix, legendre_p, QuadratureRule,
};
