//! Differences between one-sided boundary limits and the principal-value
//! (or finite-part) operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::Discretization;
use crate::kernels::{Side, Variant};

/// Term `J` with `PV = one_sided_limit + J` on `side`, per node.
///
/// The normal points out of the domain, so the exterior limit of `D` is
/// `PV + mu/2` and that of `grad S` is `PV - n sigma / 2`. Second
/// derivatives pick up curvature and `d sigma / ds` contributions.
pub fn jump_term(
    variant: Variant,
    side: Side,
    disc: &Discretization,
    density: &[Complex64],
) -> Result<Vec<Complex64>> {
    disc.check_density(density)?;
    let s = side.sign();
    let needs_ds = matches!(
        variant,
        Variant::Sxx | Variant::Sxy | Variant::Syy | Variant::Dx | Variant::Dy
    );
    let ds = if needs_ds {
        disc.arclength_derivative(density)?
    } else {
        Vec::new()
    };
    let out = (0..disc.len())
        .map(|j| {
            let n = disc.normals[j];
            let t = disc.tangents[j];
            let sig = density[j];
            let kappa = disc.curvature[j];
            // (i, j) entries of -kappa/2 (2 n n^T - I) sigma + 1/2 (n t^T + t n^T) sigma'
            let second = |a: usize, b: usize| {
                let delta = if a == b { 1.0 } else { 0.0 };
                let nn = n.component(a) * n.component(b);
                let nt = n.component(a) * t.component(b) + t.component(a) * n.component(b);
                s * (-0.5 * kappa * (2.0 * nn - delta) * sig + 0.5 * nt * ds[j])
            };
            match variant {
                Variant::S | Variant::R | Variant::Dp => Complex64::new(0.0, 0.0),
                Variant::Sx => s * 0.5 * n.x * sig,
                Variant::Sy => s * 0.5 * n.y * sig,
                Variant::Sp => s * 0.5 * sig,
                Variant::Sxx => second(0, 0),
                Variant::Sxy => second(0, 1),
                Variant::Syy => second(1, 1),
                Variant::D => -s * 0.5 * sig,
                Variant::Dx => -s * 0.5 * t.x * ds[j],
                Variant::Dy => -s * 0.5 * t.y * ds[j],
            }
        })
        .collect();
    Ok(out)
}

/// Matrix form of [`jump_term`]; block diagonal over panels.
pub fn jump_matrix(variant: Variant, side: Side, disc: &Discretization) -> Result<DMatrix<Complex64>> {
    let n = disc.len();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        e[col] = Complex64::new(1.0, 0.0);
        let v = jump_term(variant, side, disc, &e)?;
        for (row, val) in v.into_iter().enumerate() {
            m[(row, col)] = val;
        }
        e[col] = Complex64::new(0.0, 0.0);
    }
    Ok(m)
}
