//! Closed parametrized curves.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::point::Vec2;

type MapFn = Arc<dyn Fn(f64) -> Vec2 + Send + Sync>;

/// Built-in shapes and user-supplied maps.
#[derive(Clone)]
pub enum Shape {
    Circle { radius: f64 },
    /// `(cos 2 pi t, sin(2 pi t) / alpha)`.
    Ellipse { alpha: f64 },
    /// Five-armed star with radius `1 + sin(10 pi t) / 4`.
    Starfish,
    /// Single-corner drop; the corner sits at `t = 0`.
    Teardrop,
    /// Smooth non-convex bean, `t` in `[0, 2 pi)`.
    Bean,
    Custom {
        gamma: MapFn,
        dgamma: MapFn,
    },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Circle { radius } => write!(f, "Circle {{ radius: {radius} }}"),
            Shape::Ellipse { alpha } => write!(f, "Ellipse {{ alpha: {alpha} }}"),
            Shape::Starfish => f.write_str("Starfish"),
            Shape::Teardrop => f.write_str("Teardrop"),
            Shape::Bean => f.write_str("Bean"),
            Shape::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// A closed, counterclockwise curve `gamma: [0, period) -> R^2`.
#[derive(Clone, Debug)]
pub struct Curve {
    name: String,
    shape: Shape,
    period: f64,
    corners: Vec<f64>,
    interior_point: Vec2,
}

impl Curve {
    pub fn circle(radius: f64) -> Self {
        Self::builtin(format!("circle({radius})"), Shape::Circle { radius }, 1.0, vec![])
    }

    pub fn ellipse(alpha: f64) -> Self {
        Self::builtin(format!("ellipse({alpha})"), Shape::Ellipse { alpha }, 1.0, vec![])
    }

    pub fn starfish() -> Self {
        Self::builtin("starfish".into(), Shape::Starfish, 1.0, vec![])
    }

    pub fn teardrop() -> Self {
        Self::builtin("teardrop".into(), Shape::Teardrop, 1.0, vec![0.0])
    }

    pub fn bean() -> Self {
        Self::builtin("bean".into(), Shape::Bean, 2.0 * PI, vec![])
    }

    fn builtin(name: String, shape: Shape, period: f64, corners: Vec<f64>) -> Self {
        Curve {
            name,
            shape,
            period,
            corners,
            interior_point: Vec2::ZERO,
        }
    }

    /// A user-defined closed curve. `gamma` must be `period`-periodic and
    /// counterclockwise, `dgamma` its derivative; `interior_point` is any point
    /// strictly inside.
    pub fn custom<G, D>(
        name: impl Into<String>,
        period: f64,
        gamma: G,
        dgamma: D,
        corners: Vec<f64>,
        interior_point: Vec2,
    ) -> Self
    where
        G: Fn(f64) -> Vec2 + Send + Sync + 'static,
        D: Fn(f64) -> Vec2 + Send + Sync + 'static,
    {
        Curve {
            name: name.into(),
            shape: Shape::Custom {
                gamma: Arc::new(gamma),
                dgamma: Arc::new(dgamma),
            },
            period,
            corners,
            interior_point,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Parameter values of tangent discontinuities.
    pub fn corners(&self) -> &[f64] {
        &self.corners
    }

    pub fn interior_point(&self) -> Vec2 {
        self.interior_point
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        let w = 2.0 * PI;
        match &self.shape {
            Shape::Circle { radius } => Vec2::new(radius * (w * t).cos(), radius * (w * t).sin()),
            Shape::Ellipse { alpha } => Vec2::new((w * t).cos(), (w * t).sin() / alpha),
            Shape::Starfish => {
                let r = 1.0 + (5.0 * w * t).sin() / 4.0;
                Vec2::new(r * (w * t).cos(), r * (w * t).sin())
            }
            Shape::Teardrop => {
                let s = PI * t;
                Vec2::new(1.7 * (s.sin() - 0.5), 0.85 * s.cos() * (s - PI) * s)
            }
            Shape::Bean => {
                let m = 1.0 + (2.0 * t).sin() / 2.0;
                let a = t - PI / 4.0;
                Vec2::new(0.75 * a.cos() * m, a.sin() * m)
            }
            Shape::Custom { gamma, .. } => gamma(t),
        }
    }

    pub fn deriv(&self, t: f64) -> Vec2 {
        let w = 2.0 * PI;
        match &self.shape {
            Shape::Circle { radius } => {
                Vec2::new(-radius * w * (w * t).sin(), radius * w * (w * t).cos())
            }
            Shape::Ellipse { alpha } => Vec2::new(-w * (w * t).sin(), w * (w * t).cos() / alpha),
            Shape::Starfish => {
                let r = 1.0 + (5.0 * w * t).sin() / 4.0;
                let dr = 5.0 * w * (5.0 * w * t).cos() / 4.0;
                let (s, c) = (w * t).sin_cos();
                Vec2::new(dr * c - r * w * s, dr * s + r * w * c)
            }
            Shape::Teardrop => {
                let s = PI * t;
                // y = 0.85 cos(s) (s^2 - pi s)
                let dy = 0.85 * PI * (-s.sin() * (s * s - PI * s) + s.cos() * (2.0 * s - PI));
                Vec2::new(1.7 * PI * s.cos(), dy)
            }
            Shape::Bean => {
                let m = 1.0 + (2.0 * t).sin() / 2.0;
                let dm = (2.0 * t).cos();
                let a = t - PI / 4.0;
                Vec2::new(
                    0.75 * (-a.sin() * m + a.cos() * dm),
                    a.cos() * m + a.sin() * dm,
                )
            }
            Shape::Custom { dgamma, .. } => dgamma(t),
        }
    }

    /// Second derivative; custom maps fall back to central differences of
    /// the first derivative.
    pub fn deriv2(&self, t: f64) -> Vec2 {
        let w = 2.0 * PI;
        match &self.shape {
            Shape::Circle { radius } => {
                let f = -radius * w * w;
                Vec2::new(f * (w * t).cos(), f * (w * t).sin())
            }
            Shape::Ellipse { alpha } => {
                Vec2::new(-w * w * (w * t).cos(), -w * w * (w * t).sin() / alpha)
            }
            Shape::Starfish => {
                let r = 1.0 + (5.0 * w * t).sin() / 4.0;
                let dr = 5.0 * w * (5.0 * w * t).cos() / 4.0;
                let ddr = -25.0 * w * w * (5.0 * w * t).sin() / 4.0;
                let (s, c) = (w * t).sin_cos();
                Vec2::new(
                    ddr * c - 2.0 * dr * w * s - r * w * w * c,
                    ddr * s + 2.0 * dr * w * c - r * w * w * s,
                )
            }
            Shape::Teardrop => {
                let s = PI * t;
                let q = s * s - PI * s;
                let ddy = 0.85
                    * PI
                    * PI
                    * (-s.cos() * q - 2.0 * s.sin() * (2.0 * s - PI) + 2.0 * s.cos());
                Vec2::new(-1.7 * PI * PI * s.sin(), ddy)
            }
            Shape::Bean => {
                let m = 1.0 + (2.0 * t).sin() / 2.0;
                let dm = (2.0 * t).cos();
                let ddm = -2.0 * (2.0 * t).sin();
                let a = t - PI / 4.0;
                let (sa, ca) = a.sin_cos();
                Vec2::new(
                    0.75 * (-ca * m - 2.0 * sa * dm + ca * ddm),
                    -sa * m + 2.0 * ca * dm + sa * ddm,
                )
            }
            Shape::Custom { dgamma, .. } => {
                let h = 1e-5 * self.period;
                (dgamma(t + h) - dgamma(t - h)) * (0.5 / h)
            }
        }
    }

    /// Whether the parameter range `[ta, tb]` touches a declared corner
    /// (modulo the period).
    pub fn corner_between(&self, ta: f64, tb: f64) -> bool {
        self.corners.iter().any(|&c| {
            let c = c.rem_euclid(self.period);
            (ta..=tb).contains(&c) || (ta..=tb).contains(&(c + self.period))
        })
    }

    /// Winding number of the curve about `p`, by summing turning angles of
    /// an `n`-gon inscribed in the curve.
    pub fn winding_number(&self, p: Vec2, n: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = self.eval(0.0) - p;
        for i in 1..=n {
            let cur = self.eval(self.period * i as f64 / n as f64) - p;
            total += prev.cross(cur).atan2(prev.dot(cur));
            prev = cur;
        }
        total / (2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<Curve> {
        vec![
            Curve::circle(1.0),
            Curve::circle(2.0),
            Curve::ellipse(3.0),
            Curve::ellipse(6.0),
            Curve::starfish(),
            Curve::teardrop(),
            Curve::bean(),
        ]
    }

    #[test]
    fn closed_and_counterclockwise() {
        for c in all() {
            let a = c.eval(0.0);
            let b = c.eval(c.period());
            assert!(a.distance(b) < 1e-14, "{} not closed", c.name());
            let w = c.winding_number(c.interior_point(), 2000);
            assert!((w - 1.0).abs() < 1e-10, "{}: winding {w}", c.name());
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        for c in all() {
            for i in 0..37 {
                let t = c.period() * (i as f64 + 0.31) / 37.0;
                let d1 = (c.eval(t + h) - c.eval(t - h)) * (0.5 / h);
                let d2 = (c.deriv(t + h) - c.deriv(t - h)) * (0.5 / h);
                let s1 = c.deriv(t).norm().max(1.0);
                let s2 = c.deriv2(t).norm().max(1.0);
                assert!((d1 - c.deriv(t)).norm() < 1e-7 * s1, "{} t={t}", c.name());
                assert!((d2 - c.deriv2(t)).norm() < 1e-6 * s2, "{} t={t}", c.name());
            }
        }
    }

    #[test]
    fn teardrop_has_a_genuine_corner() {
        let c = Curve::teardrop();
        let t0 = c.deriv(0.0).normalized();
        let t1 = c.deriv(1.0).normalized();
        assert!(c.deriv(0.0).norm() > 1.0);
        // one-sided tangents disagree
        assert!(t0.dot(t1) < 0.9);
        assert!(c.corner_between(0.99, 1.0));
        assert!(!c.corner_between(0.2, 0.3));
    }

    proptest::proptest! {
        #[test]
        fn winding_separates_inside_from_outside(angle in 0.0f64..6.3, frac in 0.0f64..0.9, far in 1.2f64..5.0, which in 0usize..7) {
            let c = &all()[which];
            // points on the segment from the interior point to the curve lie inside
            let t = c.period() * angle / 6.3;
            let edge = c.eval(t);
            let inside = c.interior_point() + (edge - c.interior_point()) * frac;
            proptest::prop_assume!(inside.distance(edge) > 1e-2);
            let w = c.winding_number(inside, 4000);
            proptest::prop_assert!((w - 1.0).abs() < 1e-8, "{}: {}", c.name(), w);
            let outside = Vec2::new(angle.cos(), angle.sin()) * (3.0 * far);
            proptest::prop_assert!(c.winding_number(outside, 4000).abs() < 1e-8);
        }
    }
}
