//! Local expansions about a center: source coefficient factors, target
//! evaluation functionals and explicit coefficient formation.
//!
//! Helmholtz expansions use `W_l(x') = H_l(k|x'-c|) e^{i l theta'}` at the
//! source and `V_l(x) = J_l(k|x-c|) e^{-i l theta}` at the target, so that
//! `G(x, x') = (i/4) sum_l W_l(x') V_l(x)` for `|x - c| < |x' - c|`.
//! Laplace expansions use `log|x - x'|` split into the holomorphic powers
//! `(x-c)^l` and their conjugates, which keeps complex densities exact.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::centers::ExpansionCenter;
use crate::error::{QbxError, Result};
use crate::kernels::{Frame, Kernel, SourceFactor, TargetDerivative};
use crate::point::Vec2;
use crate::specfun::{bessel_j_seq, hankel1_seq_into};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Distance tolerance (relative to the radius) for sources that are
/// considered inside an expansion disk.
pub const DISK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    HelmholtzBessel,
    LaplaceTaylor,
}

/// Computes source factors and target functionals of order `p` for one
/// kernel. Entries are indexed by `l + p` for `l` in `-p..=p`.
#[derive(Debug, Clone, Copy)]
pub struct Expander {
    pub kernel: Kernel,
    pub p: usize,
}

impl Expander {
    pub fn new(kernel: Kernel, p: usize) -> Self {
        Expander { kernel, p }
    }

    pub fn len(&self) -> usize {
        2 * self.p + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Overall constant multiplying every expansion.
    pub fn prefactor(&self) -> Complex64 {
        match self.kernel {
            Kernel::Helmholtz { .. } => I / 4.0,
            Kernel::Laplace => ONE,
        }
    }

    /// Source-side factors for one source point; `out` has length `2p+1`.
    pub fn source_factors(
        &self,
        c: Vec2,
        source: Vec2,
        frame: Frame,
        factor: SourceFactor,
        out: &mut [Complex64],
    ) -> Result<()> {
        let mut scratch = FactorScratch::default();
        self.source_factors_multi(c, source, frame, &[factor], out, &mut scratch)
    }

    /// Source factors of several kinds at once, sharing the special-function
    /// evaluations; `outs` holds one block of `2p+1` values per factor.
    pub fn source_factors_multi(
        &self,
        c: Vec2,
        source: Vec2,
        frame: Frame,
        factors: &[SourceFactor],
        outs: &mut [Complex64],
        scratch: &mut FactorScratch,
    ) -> Result<()> {
        let p = self.p;
        let zeta = (source - c).to_complex();
        let rho = zeta.norm();
        if rho == 0.0 {
            return Err(QbxError::CoincidentPoints {
                x: source.x,
                y: source.y,
            });
        }
        match self.kernel {
            Kernel::Helmholtz { k } => {
                // W_l for l in -(p+1)..=(p+1), index l + p + 1
                hankel1_seq_into(p + 1, k * rho, &mut scratch.h, &mut scratch.j)?;
                let h = &scratch.h;
                let u = zeta / rho;
                let w_all = &mut scratch.w;
                w_all.clear();
                w_all.resize(2 * p + 3, ZERO);
                let mut up = ONE;
                for (l, &hl) in h.iter().enumerate() {
                    let w = hl * up;
                    w_all[p + 1 + l] = w;
                    let sgn = if l % 2 == 0 { 1.0 } else { -1.0 };
                    w_all[p + 1 - l] = sgn * hl * up.conj();
                    up *= u;
                }
                for (f, out) in factors.iter().zip(outs.chunks_mut(2 * p + 1)) {
                    match f {
                        SourceFactor::Plain => out.copy_from_slice(&w_all[1..2 * p + 2]),
                        SourceFactor::Normal | SourceFactor::Tangent => {
                            let v = if *f == SourceFactor::Normal { frame.normal } else { frame.tangent };
                            let nu = Complex64::new(v.x, v.y);
                            let half_k = 0.5 * k;
                            for i in 0..2 * p + 1 {
                                // W_{l-1} at w_all[i], W_{l+1} at w_all[i+2]
                                out[i] = half_k * (nu * w_all[i] - nu.conj() * w_all[i + 2]);
                            }
                        }
                    }
                }
            }
            Kernel::Laplace => {
                let inv = 1.0 / zeta;
                let c4 = 1.0 / (4.0 * PI);
                for (f, out) in factors.iter().zip(outs.chunks_mut(2 * p + 1)) {
                    match f {
                        SourceFactor::Plain => {
                            out[p] = Complex64::new(-rho.ln() / (2.0 * PI), 0.0);
                            let mut pw = ONE;
                            for l in 1..=p {
                                pw *= inv;
                                let v = pw * (c4 / l as f64);
                                out[p + l] = v;
                                out[p - l] = v.conj();
                            }
                        }
                        SourceFactor::Normal | SourceFactor::Tangent => {
                            let v = if *f == SourceFactor::Normal { frame.normal } else { frame.tangent };
                            let nu = Complex64::new(v.x, v.y);
                            out[p] = Complex64::new(-(nu * inv).re / (2.0 * PI), 0.0);
                            let mut pw = inv;
                            for l in 1..=p {
                                pw *= inv;
                                let val = -nu * pw * c4;
                                out[p + l] = val;
                                out[p - l] = val.conj();
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Target-side functional applying `deriv` to each basis function at `x`;
    /// `normal` is read only for [`TargetDerivative::Normal`].
    pub fn target_functional(
        &self,
        c: Vec2,
        x: Vec2,
        deriv: TargetDerivative,
        normal: Vec2,
        out: &mut [Complex64],
    ) -> Result<()> {
        let p = self.p as i64;
        let z = (x - c).to_complex();
        let idx = |l: i64| (l + p) as usize;
        match self.kernel {
            Kernel::Helmholtz { k } => {
                let rho = z.norm();
                let m = p + 2;
                let j = bessel_j_seq(m as usize, k * rho)?;
                let v = if rho > 0.0 { z.conj() / rho } else { ONE };
                // V_l for l in -m..=m, index l + m
                let mut vv = vec![ZERO; (2 * m + 1) as usize];
                let mut vp = ONE;
                for l in 0..=m {
                    let jl = j[l as usize];
                    vv[(m + l) as usize] = jl * vp;
                    let sgn = if l % 2 == 0 { 1.0 } else { -1.0 };
                    vv[(m - l) as usize] = sgn * jl * vp.conj();
                    vp *= v;
                }
                let at = |l: i64| vv[(l + m) as usize];
                let (hk, qk) = (0.5 * k, 0.25 * k * k);
                for l in -p..=p {
                    let dx = hk * (at(l - 1) - at(l + 1));
                    let dy = -I * hk * (at(l - 1) + at(l + 1));
                    out[idx(l)] = match deriv {
                        TargetDerivative::Value => at(l),
                        TargetDerivative::Dx => dx,
                        TargetDerivative::Dy => dy,
                        TargetDerivative::Normal => dx * normal.x + dy * normal.y,
                        TargetDerivative::Dxx => qk * (at(l - 2) - 2.0 * at(l) + at(l + 2)),
                        TargetDerivative::Dyy => -qk * (at(l - 2) + 2.0 * at(l) + at(l + 2)),
                        TargetDerivative::Dxy => -I * qk * (at(l - 2) - at(l + 2)),
                    };
                }
            }
            Kernel::Laplace => {
                // powers z^0..z^p
                let mut pw = vec![ONE; (p + 1) as usize];
                for l in 1..=p as usize {
                    pw[l] = pw[l - 1] * z;
                }
                let zp = |l: i64| if l < 0 { ZERO } else { pw[l as usize] };
                out[idx(0)] = match deriv {
                    TargetDerivative::Value => ONE,
                    _ => ZERO,
                };
                for l in 1..=p {
                    let lf = l as f64;
                    let d1 = lf * zp(l - 1);
                    let d2 = lf * (lf - 1.0) * zp(l - 2);
                    let (hol, anti) = match deriv {
                        TargetDerivative::Value => (zp(l), zp(l).conj()),
                        TargetDerivative::Dx => (d1, d1.conj()),
                        TargetDerivative::Dy => (I * d1, -I * d1.conj()),
                        TargetDerivative::Normal => {
                            let nc = Complex64::new(normal.x, normal.y);
                            (nc * d1, nc.conj() * d1.conj())
                        }
                        TargetDerivative::Dxx => (d2, d2.conj()),
                        TargetDerivative::Dxy => (I * d2, -I * d2.conj()),
                        TargetDerivative::Dyy => (-d2, -d2.conj()),
                    };
                    out[idx(l)] = hol;
                    out[idx(-l)] = anti;
                }
            }
        }
        Ok(())
    }
}

/// Reusable buffers for [`Expander::source_factors_multi`].
#[derive(Debug, Default, Clone)]
pub struct FactorScratch {
    w: Vec<Complex64>,
    h: Vec<Complex64>,
    j: Vec<f64>,
}

/// Coefficients of a layer potential's local expansion about one center.
#[derive(Debug, Clone)]
pub struct LocalExpansion {
    pub center: ExpansionCenter,
    pub p: usize,
    pub kernel: Kernel,
    /// Index `l + p` for `l` in `-p..=p`, prefactor included.
    pub coeffs: Vec<Complex64>,
}

impl LocalExpansion {
    pub fn kind(&self) -> ExpansionKind {
        match self.kernel {
            Kernel::Helmholtz { .. } => ExpansionKind::HelmholtzBessel,
            Kernel::Laplace => ExpansionKind::LaplaceTaylor,
        }
    }

    /// Coefficient of order `l`.
    pub fn coeff(&self, l: i64) -> Complex64 {
        self.coeffs[(l + self.p as i64) as usize]
    }

    /// Evaluates the expansion (or a derivative) at a point of the closed
    /// disk.
    pub fn eval(&self, target: Vec2, deriv: TargetDerivative, normal: Vec2) -> Result<Complex64> {
        let dist = target.distance(self.center.center);
        if dist > self.center.radius * (1.0 + 1e-12) {
            return Err(QbxError::TargetOutsideDisk {
                distance: dist,
                radius: self.center.radius,
            });
        }
        let ex = Expander::new(self.kernel, self.p);
        let mut e = vec![ZERO; ex.len()];
        ex.target_functional(self.center.center, target, deriv, normal, &mut e)?;
        Ok(e.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum())
    }
}

/// Sources as seen by expansion formation.
pub struct SourceView<'a> {
    pub points: &'a [Vec2],
    pub frames: Vec<Frame>,
    pub weights: &'a [f64],
    /// Panel of each source node, used for the disk-containment exemption.
    pub panel_of: Option<&'a [usize]>,
}

/// Forms the expansion of the layer potential with the given source factor
/// about `center`.
///
/// Sources strictly inside the disk make the expansion diverge and are
/// rejected, except those on panels listed in `exempt`.
pub fn form_expansion(
    center: &ExpansionCenter,
    p: usize,
    kernel: Kernel,
    factor: SourceFactor,
    sources: &SourceView<'_>,
    density: &[Complex64],
    exempt: &[usize],
) -> Result<LocalExpansion> {
    if density.len() != sources.points.len() {
        return Err(QbxError::DimensionMismatch {
            expected: sources.points.len(),
            got: density.len(),
        });
    }
    let ex = Expander::new(kernel, p);
    let mut coeffs = vec![ZERO; ex.len()];
    let mut f = vec![ZERO; ex.len()];
    let limit = center.radius * (1.0 - DISK_TOL);
    for (s, &x) in sources.points.iter().enumerate() {
        let dist = x.distance(center.center);
        if dist < limit {
            let own = sources.panel_of.is_some_and(|po| exempt.contains(&po[s]));
            if !own {
                return Err(QbxError::SourceInsideDisk {
                    node: s,
                    center: center.target,
                    distance: dist,
                    radius: center.radius,
                });
            }
        }
        let sw = density[s] * sources.weights[s];
        if sw == ZERO {
            continue;
        }
        ex.source_factors(center.center, x, sources.frames[s], factor, &mut f)?;
        for (c, v) in coeffs.iter_mut().zip(&f) {
            *c += v * sw;
        }
    }
    let pref = ex.prefactor();
    coeffs.iter_mut().for_each(|c| *c *= pref);
    Ok(LocalExpansion {
        center: *center,
        p,
        kernel,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_value, Side, Variant};

    fn center(c: Vec2, r: f64) -> ExpansionCenter {
        ExpansionCenter {
            center: c,
            radius: r,
            side: Side::Interior,
            target: 0,
            panel: 0,
        }
    }

    fn single_source(x: Vec2, frame: Frame) -> (Vec<Vec2>, Vec<Frame>, Vec<f64>) {
        (vec![x], vec![frame], vec![1.0])
    }

    #[test]
    fn point_source_expansions_match_kernels() {
        let frame = Frame::from_tangent(Vec2::new(0.6, 0.8));
        let src = Vec2::new(1.3, -0.4);
        let c = Vec2::new(0.1, 0.2);
        let (pts, frames, w) = single_source(src, frame);
        let view = SourceView { points: &pts, frames, weights: &w, panel_of: None };
        let ones = [ONE];
        let normal = Vec2::new(0.28, 0.96);
        for kernel in [Kernel::Helmholtz { k: 0.5 }, Kernel::Helmholtz { k: 3.0 }, Kernel::Laplace] {
            let p = 30;
            let cen = center(c, 0.5);
            for factor in [SourceFactor::Plain, SourceFactor::Normal, SourceFactor::Tangent] {
                let e = form_expansion(&cen, p, kernel, factor, &view, &ones, &[]).unwrap();
                for &(dx, dy) in &[(0.0, 0.0), (0.2, -0.1), (-0.3, 0.35), (0.0, 0.5)] {
                    let x = c + Vec2::new(dx, dy);
                    for (deriv, base) in [
                        (TargetDerivative::Value, [Variant::S, Variant::D, Variant::R]),
                        (TargetDerivative::Dx, [Variant::Sx, Variant::Dx, Variant::R]),
                        (TargetDerivative::Dy, [Variant::Sy, Variant::Dy, Variant::R]),
                        (TargetDerivative::Normal, [Variant::Sp, Variant::Dp, Variant::R]),
                        (TargetDerivative::Dxx, [Variant::Sxx, Variant::Sxx, Variant::R]),
                        (TargetDerivative::Dxy, [Variant::Sxy, Variant::Sxy, Variant::R]),
                        (TargetDerivative::Dyy, [Variant::Syy, Variant::Syy, Variant::R]),
                    ] {
                        let variant = match factor {
                            SourceFactor::Plain => base[0],
                            SourceFactor::Normal => base[1],
                            SourceFactor::Tangent => base[2],
                        };
                        if factor == SourceFactor::Normal && deriv.is_second() {
                            continue;
                        }
                        if factor == SourceFactor::Tangent && deriv != TargetDerivative::Value {
                            continue;
                        }
                        let got = e.eval(x, deriv, normal).unwrap();
                        let want = kernel_value(kernel, variant, x, normal, src, frame).unwrap();
                        assert!(
                            (got - want).norm() < 1e-10 * want.norm().max(1.0),
                            "{kernel:?} {factor:?} {deriv:?} at {x:?}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_expansions() {
        let frame = Frame::from_tangent(Vec2::new(1.0, 0.0));
        let (pts, frames, w) = single_source(Vec2::new(2.0, 0.0), frame);
        let view = SourceView { points: &pts, frames, weights: &w, panel_of: None };
        let cen = center(Vec2::ZERO, 1.0);
        let e = form_expansion(&cen, 5, Kernel::Helmholtz { k: 0.5 }, SourceFactor::Plain, &view, &[ZERO], &[])
            .unwrap();
        assert!(e.coeffs.iter().all(|c| *c == ZERO));
        let e = form_expansion(&cen, 5, Kernel::Helmholtz { k: 0.5 }, SourceFactor::Plain, &view, &[ONE], &[])
            .unwrap();
        let at_c = e.eval(Vec2::ZERO, TargetDerivative::Value, Vec2::ZERO).unwrap();
        assert!((at_c - e.coeff(0)).norm() < 1e-16);
        assert!(matches!(
            e.eval(Vec2::new(1.1, 0.0), TargetDerivative::Value, Vec2::ZERO),
            Err(QbxError::TargetOutsideDisk { .. })
        ));
        // a Laplace expansion with only the linear term has constant gradient
        let lin = LocalExpansion {
            center: cen,
            p: 3,
            kernel: Kernel::Laplace,
            coeffs: {
                let mut c = vec![ZERO; 7];
                c[4] = Complex64::new(0.5, 0.0);
                c[2] = Complex64::new(0.5, 0.0);
                c
            },
        };
        for x in [Vec2::new(0.3, 0.1), Vec2::new(-0.5, 0.5)] {
            let g = lin.eval(x, TargetDerivative::Dx, Vec2::ZERO).unwrap();
            assert!((g - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        // sources inside the disk are rejected unless exempt
        let inside = SourceView {
            points: &[Vec2::new(0.5, 0.0)],
            frames: vec![frame],
            weights: &[1.0],
            panel_of: Some(&[4]),
        };
        assert!(matches!(
            form_expansion(&cen, 3, Kernel::Laplace, SourceFactor::Plain, &inside, &[ONE], &[]),
            Err(QbxError::SourceInsideDisk { node: 0, .. })
        ));
        assert!(form_expansion(&cen, 3, Kernel::Laplace, SourceFactor::Plain, &inside, &[ONE], &[4]).is_ok());
    }

    #[test]
    fn graf_truncation_rate() {
        // error at the disk boundary decays like r^(p+1)
        let k = 0.5;
        let src = Vec2::new(1.0, 0.0);
        let frame = Frame::from_tangent(Vec2::new(0.0, 1.0));
        let (pts, frames, w) = single_source(src, frame);
        let view = SourceView { points: &pts, frames, weights: &w, panel_of: None };
        let kern = Kernel::Helmholtz { k };
        for p in 1..=10 {
            let mut logs = Vec::new();
            for r in [0.4, 0.28, 0.2, 0.14, 0.1] {
                let cen = center(Vec2::ZERO, r);
                let x = Vec2::new(-r, 0.0);
                let want = kernel_value(kern, Variant::S, x, Vec2::ZERO, src, frame).unwrap();
                let e = form_expansion(&cen, p, kern, SourceFactor::Plain, &view, &[ONE], &[]).unwrap();
                let err = (e.eval(x, TargetDerivative::Value, Vec2::ZERO).unwrap() - want).norm();
                logs.push((r.ln(), err.ln()));
            }
            let slope = crate::solve::fit_slope(&logs);
            assert!((slope - (p as f64 + 1.0)).abs() <= 0.5, "p={p}: slope {slope}");
        }
    }

    proptest::proptest! {
        #[test]
        fn graf_expansion_reproduces_a_point_source(
            angle in 0.0f64..6.3,
            sep in 2.0f64..6.0,
            rho in 0.0f64..1.0,
            phi in 0.0f64..6.3,
            k in 0.1f64..3.0,
        ) {
            let r = 0.3;
            let src = Vec2::new(angle.cos(), angle.sin()) * (sep * r);
            let frame = Frame::from_tangent(Vec2::new(-angle.sin(), angle.cos()));
            let (pts, frames, w) = single_source(src, frame);
            let view = SourceView { points: &pts, frames, weights: &w, panel_of: None };
            let kernel = Kernel::Helmholtz { k };
            let e = form_expansion(&center(Vec2::ZERO, r), 40, kernel, SourceFactor::Plain, &view, &[ONE], &[]).unwrap();
            let x = Vec2::new(phi.cos(), phi.sin()) * (rho * r);
            let want = kernel_value(kernel, Variant::S, x, Vec2::ZERO, src, frame).unwrap();
            let got = e.eval(x, TargetDerivative::Value, Vec2::ZERO).unwrap();
            proptest::prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0), "{} vs {}", got, want);
        }
    }
}
