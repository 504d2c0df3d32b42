//! Panel and trapezoidal discretizations of a curve, with per-node frames.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::curve::Curve;
use crate::error::{QbxError, Result};
use crate::point::Vec2;
use crate::specfun::{gauss_legendre, legendre_coefficients, legendre_diff_matrix, legendre_eval};

/// Maximum number of bisection generations during panelization.
pub const MAX_GENERATIONS: usize = 20;

/// Speeds below this are treated as a degenerate parametrization.
const MIN_SPEED: f64 = 1e-13;

/// A parameter interval carrying Legendre expansions of both coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub ta: f64,
    pub tb: f64,
    /// Legendre coefficients of `x(u)` for `u` in `[-1, 1]`.
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
    /// Arc length.
    pub length: f64,
}

impl Panel {
    /// Projects the curve onto `order` Legendre modes using a rule with
    /// `4 * order` points.
    pub fn from_curve(curve: &Curve, ta: f64, tb: f64, order: usize) -> Panel {
        let rule = gauss_legendre(4 * order);
        let half = 0.5 * (tb - ta);
        let mid = 0.5 * (ta + tb);
        let mut xs = Vec::with_capacity(rule.order());
        let mut ys = Vec::with_capacity(rule.order());
        let mut length = 0.0;
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + half * u;
            let p = curve.eval(t);
            xs.push(p.x);
            ys.push(p.y);
            length += w * curve.deriv(t).norm() * half;
        }
        let mut cx = legendre_coefficients(&xs);
        let mut cy = legendre_coefficients(&ys);
        cx.truncate(order);
        cy.truncate(order);
        Panel { ta, tb, cx, cy, length }
    }

    pub fn order(&self) -> usize {
        self.cx.len()
    }

    /// Position and first two derivatives with respect to `t` at the panel
    /// coordinate `u`.
    pub fn geometry_at(&self, u: f64) -> [Vec2; 3] {
        let ex = legendre_eval(&self.cx, u);
        let ey = legendre_eval(&self.cy, u);
        let s = 2.0 / (self.tb - self.ta);
        [
            Vec2::new(ex[0], ey[0]),
            Vec2::new(ex[1], ey[1]) * s,
            Vec2::new(ex[2], ey[2]) * (s * s),
        ]
    }

    pub fn param_at(&self, u: f64) -> f64 {
        0.5 * (self.ta + self.tb) + 0.5 * (self.tb - self.ta) * u
    }

    pub fn local_coordinate(&self, t: f64) -> f64 {
        (2.0 * t - self.ta - self.tb) / (self.tb - self.ta)
    }
}

/// Relative L2 energy in Legendre modes `order..` of `|gamma'|`, sampled at
/// `4 * order` Gauss points on `[ta, tb]`.
pub fn speed_tail_energy(curve: &Curve, ta: f64, tb: f64, order: usize) -> f64 {
    let rule = gauss_legendre(4 * order);
    let half = 0.5 * (tb - ta);
    let mid = 0.5 * (ta + tb);
    let speed: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&u| curve.deriv(mid + half * u).norm())
        .collect();
    let c = legendre_coefficients(&speed);
    let energy = |m: usize, v: f64| v * v * 2.0 / (2 * m + 1) as f64;
    let total: f64 = c.iter().enumerate().map(|(m, &v)| energy(m, v)).sum();
    let tail: f64 = c.iter().enumerate().skip(order).map(|(m, &v)| energy(m, v)).sum();
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

/// Options controlling resolution-driven panelization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelOptions {
    pub panel_order: usize,
    pub resolve_tol: f64,
    pub initial_panels: usize,
}

impl PanelOptions {
    /// Defaults for a curve: order 16, tolerance `1e-11` and a seed count
    /// that reproduces the customary panel counts for the built-in shapes.
    pub fn for_curve(curve: &Curve) -> Self {
        use super::curve::Shape;
        let initial_panels = match curve.shape() {
            Shape::Teardrop => 128,
            _ => 50,
        };
        PanelOptions {
            panel_order: 16,
            resolve_tol: 1e-11,
            initial_panels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Composite Gauss-Legendre on panels.
    Panels,
    /// Global equispaced rule on a smooth curve.
    Trapezoidal,
}

/// Quadrature nodes on a curve with their geometric frames.
#[derive(Debug, Clone)]
pub struct Discretization {
    curve: Curve,
    kind: GridKind,
    panels: Vec<Panel>,
    nodes_per_panel: usize,
    pub t: Vec<f64>,
    pub points: Vec<Vec2>,
    pub tangents: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub curvature: Vec<f64>,
    /// `|gamma'(t)|` at each node.
    pub speed: Vec<f64>,
    pub weights: Vec<f64>,
    /// Owning panel of each node (zero for trapezoidal grids).
    pub panel_of: Vec<usize>,
}

impl Discretization {
    /// Equispaced-in-`t` panels refined until resolved and 2:1 balanced.
    pub fn build_panelization(curve: &Curve, opts: PanelOptions) -> Result<Self> {
        if opts.panel_order < 4 {
            return Err(QbxError::InvalidArgument(format!(
                "panel order must be at least 4, got {}",
                opts.panel_order
            )));
        }
        if opts.initial_panels == 0 {
            return Err(QbxError::InvalidArgument("need at least one initial panel".into()));
        }
        let n = opts.initial_panels;
        let period = curve.period();
        let intervals: Vec<(f64, f64)> = (0..n)
            .map(|i| (period * i as f64 / n as f64, period * (i + 1) as f64 / n as f64))
            .collect();
        let panels = intervals
            .into_iter()
            .map(|(a, b)| Panel::from_curve(curve, a, b, opts.panel_order))
            .collect();
        let panels = refine_panels(curve, panels, opts.panel_order, Some(opts.resolve_tol), None)?;
        Self::from_panels(curve, panels, opts.panel_order)
    }

    /// Applies the resolution and balance criteria to an existing panel
    /// discretization; a conforming input is returned unchanged.
    pub fn refine(&self, resolve_tol: f64) -> Result<Self> {
        let order = self.panel_order();
        let panels = refine_panels(&self.curve, self.panels.clone(), order, Some(resolve_tol), None)?;
        Self::from_panels(&self.curve, panels, self.nodes_per_panel)
    }

    /// Bisects the panels on both sides of the corner at `corner_t` until each
    /// is shorter than `min_len`, then restores 2:1 balance.
    pub fn dyadic_refine_corner(&self, corner_t: f64, min_len: f64) -> Result<Self> {
        self.require_panels("corner refinement")?;
        let period = self.curve.period();
        let c = corner_t.rem_euclid(period);
        let order = self.panel_order();
        let mut panels = self.panels.clone();
        let touches = |p: &Panel| {
            let close = |a: f64| {
                let d = (a - c).rem_euclid(period);
                d.min(period - d) < 1e-14 * period
            };
            close(p.ta) || close(p.tb)
        };
        let mut changed = false;
        for _ in 0..200 {
            let mut next = Vec::with_capacity(panels.len() + 2);
            let mut split = false;
            for p in panels {
                if touches(&p) && p.length >= min_len {
                    let m = 0.5 * (p.ta + p.tb);
                    next.push(Panel::from_curve(&self.curve, p.ta, m, order));
                    next.push(Panel::from_curve(&self.curve, m, p.tb, order));
                    split = true;
                } else {
                    next.push(p);
                }
            }
            panels = next;
            if !split {
                break;
            }
            changed = true;
        }
        if !changed {
            return Ok(self.clone());
        }
        let panels = refine_panels(&self.curve, panels, order, None, Some(usize::MAX))?;
        Self::from_panels(&self.curve, panels, self.nodes_per_panel)
    }

    /// Builds node data from panels, placing `nodes_per_panel` Gauss nodes on
    /// each.
    pub fn from_panels(curve: &Curve, panels: Vec<Panel>, nodes_per_panel: usize) -> Result<Self> {
        let rule = gauss_legendre(nodes_per_panel);
        let total = panels.len() * nodes_per_panel;
        let mut d = Discretization::empty(curve.clone(), GridKind::Panels, nodes_per_panel, total);
        for (ip, p) in panels.iter().enumerate() {
            let half = 0.5 * (p.tb - p.ta);
            for (&u, &gw) in rule.nodes.iter().zip(&rule.weights) {
                let [x, d1, d2] = p.geometry_at(u);
                d.push_node(p.param_at(u), x, d1, d2, gw * half, ip)?;
            }
        }
        d.panels = panels;
        d.check_orientation()?;
        Ok(d)
    }

    /// `n` equispaced nodes in `t` with weights `(period / n) |gamma'|`.
    pub fn build_trapezoidal(curve: &Curve, n: usize) -> Result<Self> {
        if !curve.corners().is_empty() {
            return Err(QbxError::InvalidArgument(format!(
                "the trapezoidal rule needs a smooth curve; {} has corners",
                curve.name()
            )));
        }
        if n == 0 {
            return Err(QbxError::InvalidArgument("need at least one node".into()));
        }
        let h = curve.period() / n as f64;
        let mut d = Discretization::empty(curve.clone(), GridKind::Trapezoidal, n, n);
        for j in 0..n {
            let t = h * j as f64;
            d.push_node(t, curve.eval(t), curve.deriv(t), curve.deriv2(t), h, 0)?;
        }
        if n >= 8 {
            d.check_orientation()?;
        }
        Ok(d)
    }

    fn empty(curve: Curve, kind: GridKind, nodes_per_panel: usize, cap: usize) -> Self {
        Discretization {
            curve,
            kind,
            panels: Vec::new(),
            nodes_per_panel,
            t: Vec::with_capacity(cap),
            points: Vec::with_capacity(cap),
            tangents: Vec::with_capacity(cap),
            normals: Vec::with_capacity(cap),
            curvature: Vec::with_capacity(cap),
            speed: Vec::with_capacity(cap),
            weights: Vec::with_capacity(cap),
            panel_of: Vec::with_capacity(cap),
        }
    }

    fn push_node(&mut self, t: f64, x: Vec2, d1: Vec2, d2: Vec2, dt: f64, panel: usize) -> Result<()> {
        let speed = d1.norm();
        if speed < MIN_SPEED {
            return Err(QbxError::Domain(format!("zero-speed node at t = {t}")));
        }
        let tan = d1 * (1.0 / speed);
        self.t.push(t);
        self.points.push(x);
        self.tangents.push(tan);
        self.normals.push(Vec2::new(tan.y, -tan.x));
        self.curvature.push(d1.cross(d2) / (speed * speed * speed));
        self.speed.push(speed);
        self.weights.push(dt * speed);
        self.panel_of.push(panel);
        Ok(())
    }

    /// Confirms counterclockwise orientation and outward normals.
    fn check_orientation(&self) -> Result<()> {
        let inside = self.curve.interior_point();
        if (self.polygon_winding(inside) - 1.0).abs() > 1e-6 {
            return Err(QbxError::InvalidArgument(format!(
                "curve {} is not counterclockwise about its interior point",
                self.curve.name()
            )));
        }
        // Probe just off the node in the middle of the longest panel.
        let j = match self.kind {
            GridKind::Panels => {
                let (ip, _) = self
                    .panels
                    .iter()
                    .enumerate()
                    .fold((0, 0.0), |acc, (i, p)| if p.length > acc.1 { (i, p.length) } else { acc });
                ip * self.nodes_per_panel + self.nodes_per_panel / 2
            }
            GridKind::Trapezoidal => 0,
        };
        let eps = 0.05 * self.local_length(j);
        let out = self.points[j] + self.normals[j] * eps;
        if self.polygon_winding(out).abs() > 1e-6 {
            return Err(QbxError::InvalidArgument("normals do not point outward".into()));
        }
        Ok(())
    }

    fn polygon_winding(&self, p: Vec2) -> f64 {
        let n = self.points.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.points[i] - p;
            let b = self.points[(i + 1) % n] - p;
            total += a.cross(b).atan2(a.dot(b));
        }
        total / (2.0 * PI)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    /// Number of Legendre coefficients per panel coordinate.
    pub fn panel_order(&self) -> usize {
        self.panels.first().map_or(self.nodes_per_panel, |p| p.order())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn node_range(&self, panel: usize) -> std::ops::Range<usize> {
        panel * self.nodes_per_panel..(panel + 1) * self.nodes_per_panel
    }

    pub fn arc_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Local mesh size at node `j`: the owning panel's arc length, or the
    /// node weight on a trapezoidal grid.
    pub fn local_length(&self, j: usize) -> f64 {
        match self.kind {
            GridKind::Panels => self.panels[self.panel_of[j]].length,
            GridKind::Trapezoidal => self.weights[j],
        }
    }

    /// Mean panel length (mean node spacing for trapezoidal grids).
    pub fn mean_h(&self) -> f64 {
        match self.kind {
            GridKind::Panels => self.arc_length() / self.panels.len() as f64,
            GridKind::Trapezoidal => self.arc_length() / self.len() as f64,
        }
    }

    pub fn max_panel_length(&self) -> f64 {
        match self.kind {
            GridKind::Panels => self.panels.iter().map(|p| p.length).fold(0.0, f64::max),
            GridKind::Trapezoidal => self.weights.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Previous and next panel in the cyclic order.
    pub fn neighbors(&self, panel: usize) -> (usize, usize) {
        let n = self.panels.len();
        ((panel + n - 1) % n, (panel + 1) % n)
    }

    /// Same panels with `factor` times as many Gauss nodes per panel
    /// (trapezoidal: `factor` times as many equispaced nodes).
    pub fn oversample(&self, factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(QbxError::InvalidArgument("oversampling factor must be >= 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        match self.kind {
            GridKind::Panels => {
                Self::from_panels(&self.curve, self.panels.clone(), self.nodes_per_panel * factor)
            }
            GridKind::Trapezoidal => Self::build_trapezoidal(&self.curve, self.len() * factor),
        }
    }

    /// Oversamples the grid and interpolates a density onto it.
    pub fn oversample_with_density(
        &self,
        density: &[Complex64],
        factor: usize,
    ) -> Result<(Self, Vec<Complex64>)> {
        let fine = self.oversample(factor)?;
        let values = self.interpolate_to(&fine, density)?;
        Ok((fine, values))
    }

    /// Interpolates node samples onto another grid built on the same panels
    /// (or, for trapezoidal grids, the same curve).
    pub fn interpolate_to(&self, fine: &Discretization, density: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_density(density)?;
        match self.kind {
            GridKind::Panels => {
                if fine.panels.len() != self.panels.len() {
                    return Err(QbxError::DimensionMismatch {
                        expected: self.panels.len(),
                        got: fine.panels.len(),
                    });
                }
                let m = crate::specfun::legendre_interp_matrix(
                    &gauss_legendre(self.nodes_per_panel).nodes,
                    &gauss_legendre(fine.nodes_per_panel).nodes,
                );
                let mut out = vec![Complex64::new(0.0, 0.0); fine.len()];
                for ip in 0..self.panels.len() {
                    let src = &density[self.node_range(ip)];
                    for (i, o) in out[fine.node_range(ip)].iter_mut().enumerate() {
                        *o = src.iter().enumerate().map(|(j, &v)| v * m[(i, j)]).sum();
                    }
                }
                Ok(out)
            }
            GridKind::Trapezoidal => {
                let m = trig_interp_matrix(self.len(), &fine.t, self.curve.period());
                Ok((0..fine.len())
                    .map(|i| density.iter().enumerate().map(|(j, &v)| v * m[(i, j)]).sum())
                    .collect())
            }
        }
    }

    pub fn check_density(&self, density: &[Complex64]) -> Result<()> {
        if density.len() != self.len() {
            return Err(QbxError::DimensionMismatch {
                expected: self.len(),
                got: density.len(),
            });
        }
        Ok(())
    }

    /// Arc-length derivative of node samples: per-panel polynomial
    /// differentiation, or spectral differentiation on trapezoidal grids.
    pub fn arclength_derivative(&self, density: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_density(density)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        match self.kind {
            GridKind::Panels => {
                let d = legendre_diff_matrix(&gauss_legendre(self.nodes_per_panel).nodes);
                for (ip, p) in self.panels.iter().enumerate() {
                    let r = self.node_range(ip);
                    let scale = 2.0 / (p.tb - p.ta);
                    let src = &density[r.clone()];
                    for (i, j) in r.enumerate() {
                        let du: Complex64 = src.iter().enumerate().map(|(m, &v)| v * d[(i, m)]).sum();
                        out[j] = du * scale / self.speed[j];
                    }
                }
            }
            GridKind::Trapezoidal => {
                let n = self.len();
                let w = 2.0 * PI / self.curve.period();
                let half = n / 2;
                for (m, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &v) in density.iter().enumerate() {
                        let mut kern = 0.0;
                        for f in 1..=half {
                            let fk = if n.is_multiple_of(2) && f == half { 0.5 } else { 1.0 };
                            let ang = 2.0 * PI * f as f64 * (m as f64 - j as f64) / n as f64;
                            kern -= 2.0 * fk * f as f64 * ang.sin();
                        }
                        acc += v * kern;
                    }
                    *o = acc * w / (n as f64) / self.speed[m];
                }
            }
        }
        Ok(out)
    }

    /// Writes `t, x, y, nx, ny, w` per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,y,nx,ny,w")?;
        for j in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[j],
                self.points[j].x,
                self.points[j].y,
                self.normals[j].x,
                self.normals[j].y,
                self.weights[j]
            )?;
        }
        Ok(())
    }

    fn require_panels(&self, what: &str) -> Result<()> {
        if self.kind != GridKind::Panels {
            return Err(QbxError::InvalidArgument(format!("{what} needs a panel discretization")));
        }
        Ok(())
    }
}

/// Matrix evaluating the trigonometric interpolant of `n` equispaced samples
/// on `[0, period)` at parameters `ts`.
pub fn trig_interp_matrix(n: usize, ts: &[f64], period: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(ts.len(), n);
    let half = n / 2;
    for (i, &t) in ts.iter().enumerate() {
        for j in 0..n {
            let theta = 2.0 * PI * (t / period - j as f64 / n as f64);
            let mut v = 1.0;
            for f in 1..=half {
                let fk = if n.is_multiple_of(2) && f == half { 0.5 } else { 1.0 };
                v += 2.0 * fk * (f as f64 * theta).cos();
            }
            m[(i, j)] = v / n as f64;
        }
    }
    m
}

/// Bisection loop shared by panelization and corner rebalancing.
///
/// With `resolve_tol` set, panels whose `|gamma'|` tail energy exceeds it
/// are split; panels longer than twice a neighbor are always split.
fn refine_panels(
    curve: &Curve,
    mut panels: Vec<Panel>,
    order: usize,
    resolve_tol: Option<f64>,
    max_generations: Option<usize>,
) -> Result<Vec<Panel>> {
    let limit = max_generations.unwrap_or(MAX_GENERATIONS);
    let mut generation = 0;
    loop {
        let n = panels.len();
        let mut split = vec![false; n];
        for i in 0..n {
            if let Some(tol) = resolve_tol {
                if speed_tail_energy(curve, panels[i].ta, panels[i].tb, order) > tol {
                    split[i] = true;
                }
            }
            let prev = &panels[(i + n - 1) % n];
            let next = &panels[(i + 1) % n];
            let h = panels[i].length;
            if n > 1 && (h > 2.0 * prev.length || h > 2.0 * next.length) {
                split[i] = true;
            }
        }
        if !split.iter().any(|&s| s) {
            return Ok(panels);
        }
        generation += 1;
        if generation > limit {
            return Err(QbxError::RefinementLimit {
                generations: MAX_GENERATIONS,
            });
        }
        let mut next = Vec::with_capacity(2 * n);
        for (i, p) in panels.into_iter().enumerate() {
            if split[i] {
                let m = 0.5 * (p.ta + p.tb);
                next.push(Panel::from_curve(curve, p.ta, m, order));
                next.push(Panel::from_curve(curve, m, p.tb, order));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_disc(c: &Curve) -> Discretization {
        Discretization::build_panelization(c, PanelOptions::for_curve(c)).unwrap()
    }

    #[test]
    fn circle_frames() {
        let c = Curve::circle(1.0);
        let d = default_disc(&c);
        assert_eq!(d.num_panels(), 50);
        assert!((d.arc_length() - 2.0 * PI).abs() < 1e-12);
        for j in 0..d.len() {
            assert!((d.curvature[j] - 1.0).abs() < 1e-8, "{}", d.curvature[j] - 1.0);
            assert!((d.normals[j] - d.points[j]).norm() < 1e-11, "{}", (d.normals[j] - d.points[j]).norm());
        }
        let c2 = Curve::custom(
            "big circle",
            1.0,
            |t| Vec2::new(2.0 * (2.0 * PI * t).cos(), 2.0 * (2.0 * PI * t).sin()),
            |t| Vec2::new(-4.0 * PI * (2.0 * PI * t).sin(), 4.0 * PI * (2.0 * PI * t).cos()),
            vec![],
            Vec2::ZERO,
        );
        let d2 = default_disc(&c2);
        assert!(d2.curvature.iter().all(|k| (k - 0.5).abs() < 1e-8));
    }

    #[test]
    fn trapezoidal_rules() {
        let c = Curve::circle(1.0);
        let d = Discretization::build_trapezoidal(&c, 100).unwrap();
        assert!((d.arc_length() - 2.0 * PI).abs() < 1e-12);
        let one = Discretization::build_trapezoidal(&Curve::ellipse(3.0), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one.weights[0] - Curve::ellipse(3.0).deriv(0.0).norm()).abs() < 1e-15);
        assert!(Discretization::build_trapezoidal(&Curve::teardrop(), 50).is_err());
    }

    #[test]
    fn oversampling() {
        let c = Curve::starfish();
        let d = default_disc(&c);
        let f1 = d.oversample(1).unwrap();
        assert_eq!(f1.points, d.points);
        let f6 = d.oversample(6).unwrap();
        assert_eq!(f6.nodes_per_panel(), 96);
        assert!((f6.arc_length() - d.arc_length()).abs() < 1e-10 * d.arc_length());
        assert!(d.oversample(0).is_err());
        // polynomial in the panel parameter is interpolated exactly
        let poly = |u: f64| Complex64::new(u.powi(15) - 0.3 * u.powi(7) + 1.0, u.powi(3));
        let rule16 = gauss_legendre(16);
        let dens: Vec<Complex64> = (0..d.len()).map(|j| poly(rule16.nodes[j % 16])).collect();
        let fine = d.interpolate_to(&f6, &dens).unwrap();
        let rule96 = gauss_legendre(96);
        for (j, v) in fine.iter().enumerate() {
            assert!((v - poly(rule96.nodes[j % 96])).norm() < 1e-12);
        }
    }

    #[test]
    fn starfish_curvature_against_differences() {
        let c = Curve::starfish();
        let d = default_disc(&c);
        let h = 1e-5;
        for j in (0..d.len()).step_by(37) {
            let t = d.t[j];
            let p = |s: f64| c.eval(s);
            let d1 = (p(t + h) - p(t - h)) * (0.5 / h);
            let d2 = (p(t + h) - p(t) * 2.0 + p(t - h)) * (1.0 / (h * h));
            let kappa = d1.cross(d2) / d1.norm().powi(3);
            assert!((kappa - d.curvature[j]).abs() < 1e-6 * kappa.abs().max(1.0));
        }
    }

    #[test]
    fn density_derivative() {
        let c = Curve::circle(1.0);
        let d = default_disc(&c);
        let dens: Vec<Complex64> = d.t.iter().map(|&t| Complex64::new((2.0 * PI * t).sin(), 0.0)).collect();
        let ds = d.arclength_derivative(&dens).unwrap();
        for (j, v) in ds.iter().enumerate() {
            assert!((v.re - (2.0 * PI * d.t[j]).cos()).abs() < 1e-11);
        }
        let tz = Discretization::build_trapezoidal(&Curve::ellipse(2.0), 64).unwrap();
        let dens: Vec<Complex64> = tz.t.iter().map(|&t| Complex64::new((4.0 * PI * t).cos(), 0.0)).collect();
        let ds = tz.arclength_derivative(&dens).unwrap();
        for (j, v) in ds.iter().enumerate() {
            let exact = -4.0 * PI * (4.0 * PI * tz.t[j]).sin() / tz.speed[j];
            assert!((v.re - exact).abs() < 1e-10);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn weights_sum_to_the_arc_length(panels in 40usize..100, order in 14usize..20, which in 0usize..3) {
            let c = [Curve::circle(1.0), Curve::ellipse(3.0), Curve::bean()][which].clone();
            let d = crate::solve::uniform_panels(&c, panels, order).unwrap();
            let reference = default_disc(&c).arc_length();
            proptest::prop_assert!((d.arc_length() - reference).abs() <= 1e-10 * reference);
            proptest::prop_assert_eq!(d.len(), panels * order);
        }

        #[test]
        fn oversampling_preserves_smooth_integrals(factor in 1usize..8, m in 0u32..6) {
            let c = Curve::ellipse(3.0);
            let d = default_disc(&c);
            let f = |t: f64| Complex64::new((2.0 * PI * m as f64 * t).cos(), 0.0);
            let coarse: Vec<Complex64> = d.t.iter().map(|&t| f(t)).collect();
            let fine = d.oversample(factor).unwrap();
            let moved = d.interpolate_to(&fine, &coarse).unwrap();
            let a: Complex64 = coarse.iter().zip(&d.weights).map(|(v, w)| v * w).sum();
            let b: Complex64 = moved.iter().zip(&fine.weights).map(|(v, w)| v * w).sum();
            proptest::prop_assert!((a - b).norm() < 1e-11);
        }
    }
}
