//! Green's functions, their derivatives and the operator vocabulary.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QbxError, Result};
use crate::point::Vec2;
use crate::specfun::{hankel01, hankel1_seq, bessel_j_seq};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `(i/4) H0(k r)`.
    Helmholtz { k: f64 },
    /// `-(1/2pi) log r`.
    Laplace,
}

impl Kernel {
    pub fn helmholtz(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(QbxError::InvalidArgument(format!(
                "wavenumber must be finite and positive, got {k}"
            )));
        }
        Ok(Kernel::Helmholtz { k })
    }
}

/// Layer-potential variants: target derivatives of `S` and `D`, the
/// tangential source derivative `R`, and normal target derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    S,
    Sx,
    Sy,
    Sxx,
    Sxy,
    Syy,
    D,
    Dx,
    Dy,
    R,
    /// Normal derivative of `S` at the target.
    Sp,
    /// Normal derivative of `D` at the target.
    Dp,
}

impl Variant {
    pub const ALL: [Variant; 12] = [
        Variant::S,
        Variant::Sx,
        Variant::Sy,
        Variant::Sxx,
        Variant::Sxy,
        Variant::Syy,
        Variant::D,
        Variant::Dx,
        Variant::Dy,
        Variant::R,
        Variant::Sp,
        Variant::Dp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::S => "S",
            Variant::Sx => "Sx",
            Variant::Sy => "Sy",
            Variant::Sxx => "Sxx",
            Variant::Sxy => "Sxy",
            Variant::Syy => "Syy",
            Variant::D => "D",
            Variant::Dx => "Dx",
            Variant::Dy => "Dy",
            Variant::R => "R",
            Variant::Sp => "Sp",
            Variant::Dp => "Dp",
        }
    }

    /// The derivative applied at the target.
    pub fn target_derivative(self) -> TargetDerivative {
        use TargetDerivative as T;
        match self {
            Variant::S | Variant::D | Variant::R => T::Value,
            Variant::Sx | Variant::Dx => T::Dx,
            Variant::Sy | Variant::Dy => T::Dy,
            Variant::Sxx => T::Dxx,
            Variant::Sxy => T::Dxy,
            Variant::Syy => T::Dyy,
            Variant::Sp | Variant::Dp => T::Normal,
        }
    }

    /// The derivative applied at the source.
    pub fn source_factor(self) -> SourceFactor {
        match self {
            Variant::D | Variant::Dx | Variant::Dy | Variant::Dp => SourceFactor::Normal,
            Variant::R => SourceFactor::Tangent,
            _ => SourceFactor::Plain,
        }
    }

    /// Number of derivatives falling on the kernel singularity.
    pub fn singularity_order(self) -> usize {
        match self {
            Variant::S => 0,
            Variant::D | Variant::Sx | Variant::Sy | Variant::Sp | Variant::R => 1,
            _ => 2,
        }
    }

    /// Second-derivative-strength operators, whose on-surface values are
    /// finite parts.
    pub fn is_hypersingular(self) -> bool {
        matches!(
            self,
            Variant::Sxx | Variant::Sxy | Variant::Syy | Variant::Dx | Variant::Dy | Variant::Dp
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = QbxError;

    fn from_str(s: &str) -> Result<Self> {
        let canon = s.replace('\'', "p").replace('_', "");
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(&canon))
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                QbxError::InvalidArgument(format!(
                    "unknown operator '{s}'; valid names are {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetDerivative {
    Value,
    Dx,
    Dy,
    Dxx,
    Dxy,
    Dyy,
    /// Derivative along the target normal.
    Normal,
}

impl TargetDerivative {
    pub fn is_second(self) -> bool {
        matches!(self, TargetDerivative::Dxx | TargetDerivative::Dxy | TargetDerivative::Dyy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceFactor {
    Plain,
    /// `n(x') . grad_{x'}`
    Normal,
    /// `t(x') . grad_{x'}`
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    /// `-1` inside, `+1` outside.
    pub fn sign(self) -> f64 {
        match self {
            Side::Interior => -1.0,
            Side::Exterior => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Interior => Side::Exterior,
            Side::Exterior => Side::Interior,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitMode {
    Interior,
    Exterior,
    TwoSidedAverage,
    JumpSubtractedInterior,
    JumpSubtractedExterior,
}

impl LimitMode {
    pub const ALL: [LimitMode; 5] = [
        LimitMode::Interior,
        LimitMode::Exterior,
        LimitMode::TwoSidedAverage,
        LimitMode::JumpSubtractedInterior,
        LimitMode::JumpSubtractedExterior,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LimitMode::Interior => "interior",
            LimitMode::Exterior => "exterior",
            LimitMode::TwoSidedAverage => "two_sided_average",
            LimitMode::JumpSubtractedInterior => "jump_subtracted_interior",
            LimitMode::JumpSubtractedExterior => "jump_subtracted_exterior",
        }
    }
}

impl FromStr for LimitMode {
    type Err = QbxError;

    fn from_str(s: &str) -> Result<Self> {
        LimitMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| QbxError::InvalidArgument(format!("unknown limit mode '{s}'")))
    }
}

/// A fully specified boundary operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub kernel: Kernel,
    pub variant: Variant,
    pub limit_mode: LimitMode,
}

impl OperatorSpec {
    pub fn new(kernel: Kernel, variant: Variant, limit_mode: LimitMode) -> Result<Self> {
        if kernel == Kernel::Laplace
            && !matches!(variant, Variant::S | Variant::Sp | Variant::D | Variant::Dp)
        {
            return Err(QbxError::UnsupportedOperator(format!(
                "the Laplace kernel supports S, Sp, D and Dp, not {variant}"
            )));
        }
        if let Kernel::Helmholtz { k } = kernel {
            Kernel::helmholtz(k)?;
        }
        Ok(OperatorSpec {
            kernel,
            variant,
            limit_mode,
        })
    }
}

/// Tangent and outward normal at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Vec2,
    pub normal: Vec2,
}

impl Frame {
    pub fn from_tangent(tangent: Vec2) -> Self {
        Frame {
            tangent,
            normal: Vec2::new(tangent.y, -tangent.x),
        }
    }
}

/// `G`, its gradient and Hessian with respect to the target, as functions of
/// `d = x - x'`. Hessian entries are `[xx, xy, yy]`.
#[derive(Debug, Clone, Copy)]
pub struct GreenDerivatives {
    pub value: Complex64,
    pub grad: [Complex64; 2],
    pub hess: [Complex64; 3],
}

impl GreenDerivatives {
    pub fn new(kernel: Kernel, d: Vec2) -> Result<Self> {
        let r = d.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(QbxError::CoincidentPoints {
                x: d.x,
                y: d.y,
            });
        }
        // g(r) and its first two radial derivatives
        let (g, g1, g2) = match kernel {
            Kernel::Helmholtz { k } => {
                let (h0, h1) = hankel01(k * r)?;
                let q = I / 4.0;
                (q * h0, -q * k * h1, -q * k * k * (h0 - h1 / (k * r)))
            }
            Kernel::Laplace => {
                let c = 1.0 / (2.0 * PI);
                (
                    Complex64::new(-c * r.ln(), 0.0),
                    Complex64::new(-c / r, 0.0),
                    Complex64::new(c / (r * r), 0.0),
                )
            }
        };
        let (ux, uy) = (d.x / r, d.y / r);
        let a = g1 / r;
        Ok(GreenDerivatives {
            value: g,
            grad: [g1 * ux, g1 * uy],
            hess: [
                g2 * ux * ux + a * (1.0 - ux * ux),
                (g2 - a) * ux * uy,
                g2 * uy * uy + a * (1.0 - uy * uy),
            ],
        })
    }

    fn hess_apply(&self, a: Vec2, b: Vec2) -> Complex64 {
        let [hxx, hxy, hyy] = self.hess;
        hxx * (a.x * b.x) + hxy * (a.x * b.y + a.y * b.x) + hyy * (a.y * b.y)
    }

    /// Kernel of `variant`; source derivatives use `grad_{x'} = -grad_x`.
    pub fn variant(&self, variant: Variant, target_normal: Vec2, source: Frame) -> Complex64 {
        let [gx, gy] = self.grad;
        let ex = Vec2::new(1.0, 0.0);
        let ey = Vec2::new(0.0, 1.0);
        let n = source.normal;
        match variant {
            Variant::S => self.value,
            Variant::Sx => gx,
            Variant::Sy => gy,
            Variant::Sxx => self.hess[0],
            Variant::Sxy => self.hess[1],
            Variant::Syy => self.hess[2],
            Variant::Sp => gx * target_normal.x + gy * target_normal.y,
            Variant::D => -(gx * n.x + gy * n.y),
            Variant::Dx => -self.hess_apply(ex, n),
            Variant::Dy => -self.hess_apply(ey, n),
            Variant::Dp => -self.hess_apply(target_normal, n),
            Variant::R => -(gx * source.tangent.x + gy * source.tangent.y),
        }
    }
}

/// Kernel of `variant` between `target` and `source`, excluding density and
/// quadrature weight. `target_normal` is only read by `Sp` and `Dp`.
pub fn kernel_value(
    kernel: Kernel,
    variant: Variant,
    target: Vec2,
    target_normal: Vec2,
    source: Vec2,
    source_frame: Frame,
) -> Result<Complex64> {
    Ok(GreenDerivatives::new(kernel, target - source)?.variant(variant, target_normal, source_frame))
}

/// Truncated Graf expansion of `H0(k |x - x'|)` about `c`, summed over
/// `|l| <= p`.
pub fn regularized_kernel_value(k: f64, p: usize, c: Vec2, target: Vec2, source: Vec2) -> Result<Complex64> {
    let zt = (target - c).to_complex();
    let zs = (source - c).to_complex();
    let (rho, rho_s) = (zt.norm(), zs.norm());
    if rho >= rho_s {
        return Err(QbxError::ConvergenceCondition {
            target_dist: rho,
            source_dist: rho_s,
        });
    }
    let h = hankel1_seq(p, k * rho_s)?;
    let j = bessel_j_seq(p, k * rho)?;
    let mut sum = h[0] * j[0];
    if rho == 0.0 {
        return Ok(sum);
    }
    // e^{il(theta' - theta)}; the -l term equals the +l term.
    let rot = zs / rho_s * (zt / rho).conj();
    let mut ph = Complex64::new(1.0, 0.0);
    for l in 1..=p {
        ph *= rot;
        sum += 2.0 * h[l] * j[l] * ph.re;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(angle: f64) -> Frame {
        Frame::from_tangent(Vec2::new(angle.cos(), angle.sin()))
    }

    #[test]
    fn reference_values() {
        let k = Kernel::Helmholtz { k: 0.5 };
        let f = frame(0.3);
        let v = kernel_value(k, Variant::S, Vec2::new(1.0, 0.0), Vec2::ZERO, Vec2::ZERO, f).unwrap();
        let h0 = Complex64::new(0.9384698072408129042, -0.444518733506706557);
        assert!((v - I / 4.0 * h0).norm() < 1e-15);
        let l = kernel_value(Kernel::Laplace, Variant::S, Vec2::new(0.6, 0.8), Vec2::ZERO, Vec2::ZERO, f)
            .unwrap();
        assert!(l.norm() < 1e-16);
        // normal orthogonal to the separation
        let d = kernel_value(
            Kernel::Laplace,
            Variant::D,
            Vec2::new(1.0, 0.0),
            Vec2::ZERO,
            Vec2::ZERO,
            Frame { tangent: Vec2::new(1.0, 0.0), normal: Vec2::new(0.0, -1.0) },
        )
        .unwrap();
        assert_eq!(d, Complex64::new(0.0, 0.0));
        assert!(matches!(
            kernel_value(k, Variant::S, Vec2::ZERO, Vec2::ZERO, Vec2::ZERO, f),
            Err(QbxError::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn laplace_only_for_basic_operators() {
        assert!(OperatorSpec::new(Kernel::Laplace, Variant::Sx, LimitMode::Interior).is_err());
        assert!(OperatorSpec::new(Kernel::Laplace, Variant::Dp, LimitMode::Interior).is_ok());
        assert!(OperatorSpec::new(Kernel::Helmholtz { k: -1.0 }, Variant::S, LimitMode::Interior).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("S'".parse::<Variant>().unwrap(), Variant::Sp);
        let err = "Q".parse::<Variant>().unwrap_err().to_string();
        assert!(err.contains("Sxx"));
    }

    #[test]
    fn reciprocity() {
        let k = Kernel::Helmholtz { k: 0.5 };
        let a = Vec2::new(0.3, -1.1);
        let b = Vec2::new(-0.7, 0.4);
        let f = frame(0.0);
        let ab = kernel_value(k, Variant::S, a, Vec2::ZERO, b, f).unwrap();
        let ba = kernel_value(k, Variant::S, b, Vec2::ZERO, a, f).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        let src = Vec2::new(0.2, -0.1);
        let f = frame(1.1);
        let nt = Vec2::new(0.6, -0.8);
        for kernel in [Kernel::Helmholtz { k: 0.5 }, Kernel::Helmholtz { k: 7.0 }, Kernel::Laplace] {
            for x in [Vec2::new(1.0, 0.5), Vec2::new(-0.4, 0.3), Vec2::new(0.25, -0.05)] {
                let val = |v: Variant, p: Vec2| kernel_value(kernel, v, p, nt, src, f).unwrap();
                let dx = Vec2::new(h, 0.0);
                let dy = Vec2::new(0.0, h);
                let cd = |v: Variant, e: Vec2| (val(v, x + e) - val(v, x - e)) / (2.0 * h);
                let checks = [
                    (Variant::Sx, cd(Variant::S, dx)),
                    (Variant::Sy, cd(Variant::S, dy)),
                    (Variant::Sxx, cd(Variant::Sx, dx)),
                    (Variant::Sxy, cd(Variant::Sx, dy)),
                    (Variant::Syy, cd(Variant::Sy, dy)),
                    (Variant::Dx, cd(Variant::D, dx)),
                    (Variant::Dy, cd(Variant::D, dy)),
                    (Variant::Sp, cd(Variant::S, dx) * nt.x + cd(Variant::S, dy) * nt.y),
                    (Variant::Dp, cd(Variant::D, dx) * nt.x + cd(Variant::D, dy) * nt.y),
                ];
                for (v, fd) in checks {
                    let exact = val(v, x);
                    assert!(
                        (exact - fd).norm() <= 1e-6 * exact.norm().max(1.0),
                        "{kernel:?} {v} at {x:?}: {exact} vs {fd}"
                    );
                }
                // source derivatives against moving the source
                let sv = |s: Vec2| kernel_value(kernel, Variant::S, x, nt, s, f).unwrap();
                let dn = (sv(src + f.normal * h) - sv(src - f.normal * h)) / (2.0 * h);
                let dt = (sv(src + f.tangent * h) - sv(src - f.tangent * h)) / (2.0 * h);
                assert!((val(Variant::D, x) - dn).norm() < 1e-6 * dn.norm().max(1e-3));
                assert!((val(Variant::R, x) - dt).norm() < 1e-6 * dt.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn helmholtz_equation_residual() {
        let k = 2.5;
        let kern = Kernel::Helmholtz { k };
        let f = frame(0.0);
        for x in [Vec2::new(1.0, 0.5), Vec2::new(-2.0, 3.0)] {
            let v = |var| kernel_value(kern, var, x, Vec2::ZERO, Vec2::ZERO, f).unwrap();
            let res = v(Variant::Sxx) + v(Variant::Syy) + k * k * v(Variant::S);
            assert!(res.norm() <= 1e-12 * v(Variant::S).norm().max(1.0));
        }
    }

    #[test]
    fn graf_partial_sums() {
        let k = 0.5;
        let c = Vec2::new(0.1, 0.2);
        let src = Vec2::new(1.4, -0.9);
        let dist = (src - c).norm();
        // target at the center: only the l = 0 term survives
        let at_c = regularized_kernel_value(k, 10, c, c, src).unwrap();
        assert!((at_c - crate::specfun::hankel1(0, k * dist).unwrap()).norm() < 1e-15);
        let tgt = c + Vec2::new(0.3 * dist * 0.6, 0.3 * dist * 0.8);
        let exact = crate::specfun::hankel1(0, k * (tgt - src).norm()).unwrap();
        let approx = regularized_kernel_value(k, 30, c, tgt, src).unwrap();
        assert!((approx - exact).norm() < 1e-10);
        let p0 = regularized_kernel_value(k, 0, c, tgt, src).unwrap();
        let want = crate::specfun::hankel1(0, k * dist).unwrap() * crate::specfun::bessel_j(0, k * (tgt - c).norm()).unwrap();
        assert!((p0 - want).norm() < 1e-15);
        assert!(matches!(
            regularized_kernel_value(k, 5, c, src, tgt),
            Err(QbxError::ConvergenceCondition { .. })
        ));
    }

    fn point() -> impl proptest::strategy::Strategy<Value = Vec2> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| Vec2::new(x, y))
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn single_layer_is_symmetric(x in point(), y in point(), k in 0.1f64..20.0) {
            prop_assume!(x.distance(y) > 1e-3);
            let f = frame(0.0);
            for kernel in [Kernel::Helmholtz { k }, Kernel::Laplace] {
                let a = kernel_value(kernel, Variant::S, x, Vec2::ZERO, y, f).unwrap();
                let b = kernel_value(kernel, Variant::S, y, Vec2::ZERO, x, f).unwrap();
                prop_assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
            }
        }

        #[test]
        fn gradient_matches_differences(x in point(), y in point(), k in 0.1f64..5.0, angle in 0.0f64..6.3) {
            prop_assume!(x.distance(y) > 0.1);
            let kernel = Kernel::Helmholtz { k };
            let f = frame(angle);
            let h = 1e-6;
            let val = |v: Variant, p: Vec2| kernel_value(kernel, v, p, Vec2::ZERO, y, f).unwrap();
            for (v, dv, e) in [
                (Variant::S, Variant::Sx, Vec2::new(h, 0.0)),
                (Variant::S, Variant::Sy, Vec2::new(0.0, h)),
                (Variant::D, Variant::Dx, Vec2::new(h, 0.0)),
                (Variant::Sx, Variant::Sxy, Vec2::new(0.0, h)),
            ] {
                let fd = (val(v, x + e) - val(v, x - e)) / (2.0 * h);
                let exact = val(dv, x);
                prop_assert!((fd - exact).norm() <= 1e-5 * exact.norm().max(1.0), "{} {} vs {}", dv, fd, exact);
            }
        }
    }
}
