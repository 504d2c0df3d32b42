//! Reference values by adaptive Gauss quadrature on the exact curve and
//! Richardson extrapolation to the boundary.

use num_complex::Complex64;

use crate::error::{QbxError, Result};
use crate::geometry::{Discretization, GridKind};
use crate::kernels::{Frame, GreenDerivatives, Kernel, OperatorSpec, Side, Variant};
use crate::point::Vec2;
use crate::specfun::{barycentric_weights, gauss_legendre, QuadratureRule};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Extrapolation distance for weakly singular and first-derivative operators.
pub const BASE_DISTANCE: f64 = 1e-6;
/// Extrapolation distance for hypersingular operators, where cancellation
/// at `1e-6` would swamp double precision.
pub const HYPERSINGULAR_BASE_DISTANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Absolute tolerance on the full boundary integral.
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-12,
            max_depth: 60,
        }
    }
}

/// Evaluation point `x`; near-surface probes carry the curve parameter of
/// their foot point so that `x - gamma(t)` can be formed without
/// cancellation.
struct Probe {
    target: Vec2,
    normal: Vec2,
    anchor: Option<Anchor>,
}

struct Anchor {
    t: f64,
    /// `x - gamma(t)`.
    offset: Vec2,
    /// Parameter half-width over which the difference is integrated.
    window: f64,
}

struct RuleSum {
    noise: f64,
    length: f64,
    nearest: f64,
}

/// Adaptive quadrature of layer potentials with a fixed density.
pub struct Oracle<'a> {
    kernel: Kernel,
    disc: &'a Discretization,
    density: &'a [Complex64],
    bary: Vec<f64>,
    nodes: Vec<f64>,
    low: std::sync::Arc<QuadratureRule>,
    high: std::sync::Arc<QuadratureRule>,
    anchor_rule: std::sync::Arc<QuadratureRule>,
    opts: OracleOptions,
}

impl<'a> Oracle<'a> {
    pub fn new(kernel: Kernel, disc: &'a Discretization, density: &'a [Complex64], opts: OracleOptions) -> Result<Self> {
        if disc.kind() != GridKind::Panels {
            return Err(QbxError::InvalidArgument("the oracle integrates over panels".into()));
        }
        disc.check_density(density)?;
        let nodes = gauss_legendre(disc.nodes_per_panel()).nodes.clone();
        Ok(Oracle {
            kernel,
            disc,
            density,
            bary: barycentric_weights(&nodes),
            nodes,
            low: gauss_legendre(15),
            high: gauss_legendre(30),
            anchor_rule: gauss_legendre(20),
            opts,
        })
    }

    fn density_at(&self, panel: usize, u: f64) -> Complex64 {
        let vals = &self.density[self.disc.node_range(panel)];
        let mut num = ZERO;
        let mut den = 0.0;
        for (i, (&x, &w)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let d = u - x;
            if d == 0.0 {
                return vals[i];
            }
            let c = w / d;
            num += vals[i] * c;
            den += c;
        }
        num / den
    }

    /// `sum w f` over one rule on `[a, b]` of a panel, for each variant.
    /// Returns an estimate of the rounding noise in the sums, the arc length
    /// of the interval and its nearest node distance to the target.
    fn rule_sum(
        &self,
        rule: &QuadratureRule,
        panel: usize,
        a: f64,
        b: f64,
        variants: &[Variant],
        probe: &Probe,
        out: &mut [Complex64],
    ) -> Result<RuleSum> {
        let p = &self.disc.panels()[panel];
        let curve = self.disc.curve();
        let half = 0.5 * (b - a);
        let dt = 0.5 * (p.tb - p.ta);
        out.iter_mut().for_each(|v| *v = ZERO);
        let mut noise = 0.0;
        let mut length = 0.0;
        let mut nearest = f64::INFINITY;
        // Offset of the interval midpoint from the anchor in this panel's
        // coordinate, wrapped to the nearest period; node offsets are formed
        // from it so that their spacing is not lost to rounding in `t`.
        let rel_mid = probe.anchor.as_ref().map(|an| {
            let period = curve.period();
            let shift = ((p.param_at(0.0) - an.t) / period).round() * period;
            0.5 * (a + b) - p.local_coordinate(an.t + shift)
        });
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = 0.5 * (a + b) + half * x;
            let t = p.param_at(u);
            let pos = curve.eval(t);
            let d1 = curve.deriv(t);
            let speed = d1.norm();
            let frame = Frame::from_tangent(d1 * (1.0 / speed));
            let sigma = self.density_at(panel, u);
            let tau = rel_mid.map(|m| (m + half * x) * dt);
            let (diff, exact) = self.difference(probe, tau, pos);
            let g = GreenDerivatives::new(self.kernel, diff)?;
            let ds = w * half * dt * speed;
            let scale = sigma * ds;
            length += ds;
            let r = diff.norm();
            nearest = nearest.min(r);
            // Relative noise of each term grows like |x| / |x - x'| through
            // the cancellation in the difference vector, unless the
            // difference was integrated directly.
            let amplify = if exact { 4.0 } else { 1.0 + (probe.target.norm() + pos.norm()) / r };
            let mut node_max = 0.0f64;
            for (o, &v) in out.iter_mut().zip(variants) {
                let term = g.variant(v, probe.normal, frame) * scale;
                node_max = node_max.max(term.norm());
                *o += term;
            }
            noise += node_max * amplify;
        }
        Ok(RuleSum {
            noise: noise * f64::EPSILON,
            length,
            nearest,
        })
    }

    /// `x - gamma(t)` for the probe at `t = t_a + tau`, integrating
    /// `gamma'` from the anchor when `tau` is small so that no digits
    /// cancel.
    fn difference(&self, probe: &Probe, tau: Option<f64>, pos: Vec2) -> (Vec2, bool) {
        if let (Some(a), Some(tau)) = (&probe.anchor, tau) {
            let curve = self.disc.curve();
            let period = curve.period();
            if tau.abs() <= a.window {
                let (mut lo, mut hi) = if tau < 0.0 { (a.t + tau, a.t) } else { (a.t, a.t + tau) };
                if lo < 0.0 {
                    lo += period;
                    hi += period;
                }
                let crosses = curve.corners().iter().any(|&c| {
                    let c = c.rem_euclid(period);
                    [c, c + period].iter().any(|&c| lo < c && c < hi)
                });
                if !crosses {
                    let half = 0.5 * tau;
                    let mut delta = Vec2::ZERO;
                    for (&x, &w) in self.anchor_rule.nodes.iter().zip(&self.anchor_rule.weights) {
                        delta += curve.deriv(a.t + half * (1.0 + x)) * (w * half);
                    }
                    return (a.offset - delta, true);
                }
            }
        }
        (probe.target - pos, false)
    }

    /// Values of all `variants` at an off-surface target.
    pub fn adaptive_eval(&self, variants: &[Variant], target: Vec2, target_normal: Vec2) -> Result<Vec<Complex64>> {
        let probe = Probe {
            target,
            normal: target_normal,
            anchor: None,
        };
        self.eval_probe(variants, &probe)
    }

    fn eval_probe(&self, variants: &[Variant], probe: &Probe) -> Result<Vec<Complex64>> {
        let nv = variants.len();
        let mut total = vec![ZERO; nv];
        let np = self.disc.num_panels();
        let tol_panel = self.opts.tol / np as f64;
        let mut lo = vec![ZERO; nv];
        let mut hi = vec![ZERO; nv];
        for panel in 0..np {
            let mut stack = vec![(-1.0f64, 1.0f64, 0usize)];
            while let Some((a, b, depth)) = stack.pop() {
                self.rule_sum(&self.low, panel, a, b, variants, probe, &mut lo)?;
                let rs = self.rule_sum(&self.high, panel, a, b, variants, probe, &mut hi)?;
                let err = lo.iter().zip(&hi).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                let allowed = (tol_panel * 0.5 * (b - a)).max(8.0 * rs.noise);
                // Once the target is two interval lengths away the 30-point
                // rule is exact to far below rounding, so a larger G15/G30
                // gap only reflects noise in the geometry.
                let separated = depth > 0 && rs.nearest >= 2.0 * rs.length;
                if err <= allowed || separated {
                    total.iter_mut().zip(&hi).for_each(|(t, h)| *t += h);
                } else if depth >= self.opts.max_depth {
                    return Err(QbxError::OracleNonConvergence { levels: depth });
                } else {
                    let m = 0.5 * (a + b);
                    stack.push((m, b, depth + 1));
                    stack.push((a, m, depth + 1));
                }
            }
        }
        if total.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(QbxError::NonFinite("oracle sum".into()));
        }
        Ok(total)
    }

    /// Values at distance `d` from node `j` along the normal on `side`.
    pub fn normal_probe(&self, variants: &[Variant], j: usize, side: Side, d: f64) -> Result<Vec<Complex64>> {
        // Probe points sit on the exact normal through the exact curve point.
        let curve = self.disc.curve();
        let t = self.disc.t[j];
        let tan = curve.deriv(t).normalized();
        let n = Vec2::new(tan.y, -tan.x);
        let panel = &self.disc.panels()[self.disc.panel_of[j]];
        let offset = n * (side.sign() * d);
        let probe = Probe {
            target: curve.eval(t) + offset,
            normal: n,
            anchor: Some(Anchor {
                t,
                offset,
                window: panel.tb - panel.ta,
            }),
        };
        self.eval_probe(variants, &probe)
    }

    /// One-sided limits at node `j` by third-order Richardson extrapolation
    /// from `base`, `base/2` and `base/4` along the normal.
    pub fn richardson_limit(&self, variants: &[Variant], j: usize, side: Side, base: f64) -> Result<Vec<Complex64>> {
        let mut vals = Vec::with_capacity(3);
        for d in [base, base / 2.0, base / 4.0] {
            vals.push(self.normal_probe(variants, j, side, d)?);
        }
        Ok((0..variants.len())
            .map(|i| richardson3(vals[0][i], vals[1][i], vals[2][i]))
            .collect())
    }

    /// One-sided limits using each variant's default base distance.
    pub fn one_sided(&self, variants: &[Variant], j: usize, side: Side) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; variants.len()];
        for hyper in [false, true] {
            let idx: Vec<usize> = (0..variants.len())
                .filter(|&i| variants[i].is_hypersingular() == hyper)
                .collect();
            if idx.is_empty() {
                continue;
            }
            let group: Vec<Variant> = idx.iter().map(|&i| variants[i]).collect();
            let base = if hyper { HYPERSINGULAR_BASE_DISTANCE } else { BASE_DISTANCE };
            let v = self.richardson_limit(&group, j, side, base)?;
            for (k, &i) in idx.iter().enumerate() {
                out[i] = v[k];
            }
        }
        Ok(out)
    }

    /// Principal-value (finite-part) values at node `j`: the mean of both
    /// one-sided limits.
    pub fn pv_reference(&self, variants: &[Variant], j: usize) -> Result<Vec<Complex64>> {
        let a = self.one_sided(variants, j, Side::Interior)?;
        let b = self.one_sided(variants, j, Side::Exterior)?;
        Ok(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect())
    }
}

/// Limit at zero of `v(d) = a + b d + c d^2` from samples at `d`, `d/2`,
/// `d/4`.
pub fn richardson3(v_d: Complex64, v_half: Complex64, v_quarter: Complex64) -> Complex64 {
    (8.0 * v_quarter - 6.0 * v_half + v_d) / 3.0
}

/// Single-operator convenience form of [`Oracle::adaptive_eval`].
pub fn adaptive_eval(
    spec: &OperatorSpec,
    disc: &Discretization,
    density: &[Complex64],
    target: Vec2,
    target_normal: Vec2,
    tol: f64,
) -> Result<Complex64> {
    let o = Oracle::new(spec.kernel, disc, density, OracleOptions { tol, ..OracleOptions::default() })?;
    Ok(o.adaptive_eval(&[spec.variant], target, target_normal)?[0])
}

/// Single-operator convenience form of [`Oracle::richardson_limit`].
pub fn richardson_limit(
    spec: &OperatorSpec,
    disc: &Discretization,
    density: &[Complex64],
    node: usize,
    side: Side,
    base: f64,
) -> Result<Complex64> {
    let o = Oracle::new(spec.kernel, disc, density, OracleOptions::default())?;
    Ok(o.richardson_limit(&[spec.variant], node, side, base)?[0])
}

/// Single-operator convenience form of [`Oracle::pv_reference`].
pub fn pv_reference(spec: &OperatorSpec, disc: &Discretization, density: &[Complex64], node: usize) -> Result<Complex64> {
    let o = Oracle::new(spec.kernel, disc, density, OracleOptions::default())?;
    Ok(o.pv_reference(&[spec.variant], node)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, PanelOptions};
    use crate::kernels::LimitMode;

    fn circle() -> Discretization {
        let c = Curve::circle(1.0);
        Discretization::build_panelization(&c, PanelOptions::for_curve(&c)).unwrap()
    }

    #[test]
    fn richardson_is_exact_for_quadratics() {
        let f = |d: f64| Complex64::new(2.0 - 3.0 * d + 5.0 * d * d, 1.0 + d * d);
        let a = richardson3(f(1e-3), f(5e-4), f(2.5e-4));
        assert!((a - Complex64::new(2.0, 1.0)).norm() < 1e-14);
        let c = Complex64::new(0.7, -0.2);
        assert!((richardson3(c, c, c) - c).norm() < 1e-15);
    }

    #[test]
    fn trivial_values() {
        let d = circle();
        let zero = vec![ZERO; d.len()];
        let spec = OperatorSpec::new(Kernel::Helmholtz { k: 0.5 }, Variant::S, LimitMode::Interior).unwrap();
        let v = adaptive_eval(&spec, &d, &zero, Vec2::new(0.3, 0.1), Vec2::ZERO, 1e-12).unwrap();
        assert_eq!(v, ZERO);
        let one = vec![Complex64::new(1.0, 0.0); d.len()];
        let lap = OperatorSpec::new(Kernel::Laplace, Variant::S, LimitMode::Interior).unwrap();
        let v = adaptive_eval(&lap, &d, &one, Vec2::ZERO, Vec2::ZERO, 1e-12).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn gauss_identity() {
        let d = circle();
        let one = vec![Complex64::new(1.0, 0.0); d.len()];
        let lap = OperatorSpec::new(Kernel::Laplace, Variant::D, LimitMode::Interior).unwrap();
        for j in [0, 17, 401] {
            let inner = richardson_limit(&lap, &d, &one, j, Side::Interior, BASE_DISTANCE).unwrap();
            let outer = richardson_limit(&lap, &d, &one, j, Side::Exterior, BASE_DISTANCE).unwrap();
            assert!((inner + 1.0).norm() < 1e-10, "{inner}");
            assert!(outer.norm() < 1e-10, "{outer}");
            let pv = pv_reference(&lap, &d, &one, j).unwrap();
            assert!((pv + 0.5).norm() < 1e-10, "{pv}");
        }
    }

    #[test]
    fn single_layer_limits_agree() {
        let d = circle();
        let dens: Vec<Complex64> = d.t.iter().map(|&t| Complex64::new((2.0 * std::f64::consts::PI * t).sin(), 0.0)).collect();
        let o = Oracle::new(Kernel::Helmholtz { k: 0.5 }, &d, &dens, OracleOptions::default()).unwrap();
        let a = o.one_sided(&[Variant::S], 5, Side::Interior).unwrap()[0];
        let b = o.one_sided(&[Variant::S], 5, Side::Exterior).unwrap()[0];
        let pv = o.pv_reference(&[Variant::S], 5).unwrap()[0];
        assert!((a - b).norm() < 1e-10);
        assert!((pv - a).norm() < 1e-10);
    }

    #[test]
    fn far_target_matches_smooth_rule() {
        let d = circle();
        let fine = d.oversample(6).unwrap();
        let dens: Vec<Complex64> = d.t.iter().map(|&t| Complex64::new((6.0 * std::f64::consts::PI * t).cos(), t)).collect();
        let fd = d.interpolate_to(&fine, &dens).unwrap();
        let kern = Kernel::Helmholtz { k: 0.5 };
        let target = Vec2::new(2.5, 1.0);
        let o = Oracle::new(kern, &d, &dens, OracleOptions::default()).unwrap();
        let got = o.adaptive_eval(&[Variant::S, Variant::D], target, Vec2::ZERO).unwrap();
        for (i, v) in [Variant::S, Variant::D].into_iter().enumerate() {
            let mut direct = ZERO;
            for s in 0..fine.len() {
                let f = Frame { tangent: fine.tangents[s], normal: fine.normals[s] };
                direct += crate::kernels::kernel_value(kern, v, target, Vec2::ZERO, fine.points[s], f).unwrap()
                    * fd[s]
                    * fine.weights[s];
            }
            assert!((direct - got[i]).norm() < 1e-12);
        }
    }
}
