//! Layer-potential evaluation at arbitrary targets: on-surface limits,
//! near-surface QBX through the nearest containing expansion disk and direct
//! smooth quadrature elsewhere, plus error maps over planar grids.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QbxError, Result};
use crate::geometry::{Curve, Discretization};
use crate::kernels::{kernel_value, Frame, Kernel, LimitMode, OperatorSpec, Side, TargetDerivative, Variant};
use crate::oracle::Oracle;
use crate::point::Vec2;
use crate::qbx::{form_expansion, jump_term, resolve_mode, ExpansionCenter, LocalExpansion, QbxLayout, QbxOptions, SourceView};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Where the targets live.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// Nodes of the target discretization.
    OnSurface(Vec<usize>),
    OffSurface,
}

/// Points at which a layer potential is wanted.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub points: Vec<Vec2>,
    pub kind: TargetKind,
    /// Target normals, needed by normal-derivative variants.
    pub normals: Option<Vec<Vec2>>,
    /// Restricts near-surface targets to the disks of one side.
    pub sides: Option<Vec<Option<Side>>>,
}

impl TargetSet {
    /// Nodes of `disc`, with its normals.
    pub fn on_surface(disc: &Discretization, nodes: Vec<usize>) -> Result<Self> {
        if let Some(&j) = nodes.iter().find(|&&j| j >= disc.len()) {
            return Err(QbxError::InvalidArgument(format!("target node {j} out of range")));
        }
        Ok(TargetSet {
            points: nodes.iter().map(|&j| disc.points[j]).collect(),
            normals: Some(nodes.iter().map(|&j| disc.normals[j]).collect()),
            kind: TargetKind::OnSurface(nodes),
            sides: None,
        })
    }

    pub fn off_surface(points: Vec<Vec2>) -> Self {
        TargetSet {
            points,
            kind: TargetKind::OffSurface,
            normals: None,
            sides: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<Vec2>) -> Result<Self> {
        check_len(self.points.len(), normals.len())?;
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_sides(mut self, sides: Vec<Option<Side>>) -> Result<Self> {
        check_len(self.points.len(), sides.len())?;
        self.sides = Some(sides);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn normal(&self, i: usize) -> Vec2 {
        self.normals.as_ref().map_or(Vec2::ZERO, |n| n[i])
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(QbxError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// How an off-surface target is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Through the expansion about the center of `side` at target node `node`.
    Expansion { side: Side, node: usize },
    Direct,
}

/// Layer-potential evaluator over one target discretization.
#[derive(Debug, Clone)]
pub struct Potential {
    layout: QbxLayout,
}

impl Potential {
    pub fn new(disc: Discretization, options: QbxOptions) -> Result<Self> {
        Ok(Potential {
            layout: QbxLayout::new(disc, options)?,
        })
    }

    pub fn from_layout(layout: QbxLayout) -> Self {
        Potential { layout }
    }

    pub fn layout(&self) -> &QbxLayout {
        &self.layout
    }

    pub fn disc(&self) -> &Discretization {
        self.layout.target()
    }

    /// The center whose disk contains `x` most deeply (smallest
    /// `|x - c| / r`), if any.
    pub fn route(&self, x: Vec2, side: Option<Side>) -> Route {
        let sides: &[Side] = match side {
            Some(Side::Interior) => &[Side::Interior],
            Some(Side::Exterior) => &[Side::Exterior],
            None => &[Side::Interior, Side::Exterior],
        };
        let mut best: Option<(f64, Route)> = None;
        for &s in sides {
            for (node, c) in self.layout.centers(s).iter().enumerate() {
                let depth = x.distance(c.center) / c.radius;
                if depth <= 1.0 && best.is_none_or(|(b, _)| depth < b) {
                    best = Some((depth, Route::Expansion { side: s, node }));
                }
            }
        }
        best.map_or(Route::Direct, |(_, r)| r)
    }

    /// Values of `spec` applied to `density` (given on the target nodes) at
    /// each target, with expansion order `p`.
    pub fn apply(&self, spec: &OperatorSpec, density: &[Complex64], targets: &TargetSet, p: usize) -> Result<Vec<Complex64>> {
        let disc = self.layout.target();
        disc.check_density(density)?;
        match &targets.kind {
            TargetKind::OnSurface(nodes) => self.apply_on_surface(spec, density, nodes, p),
            TargetKind::OffSurface => {
                if spec.variant.target_derivative() == TargetDerivative::Normal && targets.normals.is_none() {
                    return Err(QbxError::InvalidArgument(format!(
                        "{} needs target normals",
                        spec.variant.name()
                    )));
                }
                self.apply_off_surface(spec, density, targets, p)
            }
        }
    }

    fn apply_on_surface(&self, spec: &OperatorSpec, density: &[Complex64], nodes: &[usize], p: usize) -> Result<Vec<Complex64>> {
        let (limit, jump) = resolve_mode(spec.limit_mode);
        let mut vals = self
            .layout
            .apply_variants_at(spec.kernel, &[spec.variant], limit, density, p, nodes)?
            .pop()
            .expect("one variant requested");
        if let Some(side) = jump {
            let jt = jump_term(spec.variant, side, self.layout.target(), density)?;
            vals.iter_mut().zip(nodes).for_each(|(v, &j)| *v += jt[j]);
        }
        Ok(vals)
    }

    fn apply_off_surface(&self, spec: &OperatorSpec, density: &[Complex64], targets: &TargetSet, p: usize) -> Result<Vec<Complex64>> {
        let fine = self.layout.source().resample(density)?;
        let routes: Vec<Route> = (0..targets.len())
            .map(|i| self.route(targets.points[i], targets.sides.as_ref().and_then(|s| s[i])))
            .collect();
        // One expansion per distinct center.
        let mut keys: Vec<(Side, usize)> = routes
            .iter()
            .filter_map(|r| match *r {
                Route::Expansion { side, node } => Some((side, node)),
                Route::Direct => None,
            })
            .collect();
        keys.sort_by_key(|&(s, n)| (s == Side::Exterior, n));
        keys.dedup();
        let expansions: Vec<LocalExpansion> = keys
            .par_iter()
            .map(|&(side, node)| self.expansion(spec, &fine, side, node, p))
            .collect::<Result<_>>()?;
        let index: HashMap<(Side, usize), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let src = &self.layout.source().disc;
        (0..targets.len())
            .into_par_iter()
            .map(|i| {
                let x = targets.points[i];
                let n = targets.normal(i);
                match routes[i] {
                    Route::Expansion { side, node } => {
                        expansions[index[&(side, node)]].eval(x, spec.variant.target_derivative(), n)
                    }
                    Route::Direct => direct_sum(spec.kernel, spec.variant, src, self.layout.source_frames(), &fine, x, n),
                }
            })
            .collect()
    }

    fn expansion(&self, spec: &OperatorSpec, fine: &[Complex64], side: Side, node: usize, p: usize) -> Result<LocalExpansion> {
        let grid = self.layout.source();
        let owner = grid.owner(node);
        let exempt: Vec<usize> = (0..grid.disc.num_panels().max(1))
            .filter(|&sp| grid.disc.num_panels() > 0 && grid.adjacent(sp, owner))
            .collect();
        let view = SourceView {
            points: &grid.disc.points,
            frames: self.layout.source_frames().to_vec(),
            weights: &grid.disc.weights,
            panel_of: (grid.disc.num_panels() > 0).then_some(&grid.disc.panel_of[..]),
        };
        let center = self.layout.centers(side)[node];
        form_expansion(&center, p, spec.kernel, spec.variant.source_factor(), &view, fine, &exempt)
    }
}

/// Convenience form: builds the default layout of order `p` on `disc` and
/// applies `spec`.
pub fn apply(spec: &OperatorSpec, disc: &Discretization, density: &[Complex64], targets: &TargetSet, p: usize) -> Result<Vec<Complex64>> {
    let options = QbxOptions {
        order: p,
        ..QbxOptions::default()
    };
    Potential::new(disc.clone(), options)?.apply(spec, density, targets, p)
}

fn frames_of(disc: &Discretization) -> Vec<Frame> {
    disc.tangents
        .iter()
        .zip(&disc.normals)
        .map(|(&tangent, &normal)| Frame { tangent, normal })
        .collect()
}

fn direct_sum(
    kernel: Kernel,
    variant: Variant,
    src: &Discretization,
    frames: &[Frame],
    density: &[Complex64],
    x: Vec2,
    normal: Vec2,
) -> Result<Complex64> {
    let mut acc = ZERO;
    for s in 0..src.len() {
        acc += kernel_value(kernel, variant, x, normal, src.points[s], frames[s])? * (src.weights[s] * density[s]);
    }
    Ok(acc)
}

/// The discretization's own quadrature rule applied to the layer potential
/// at `x`, without any singularity treatment.
pub fn direct_eval(spec: &OperatorSpec, disc: &Discretization, density: &[Complex64], x: Vec2, normal: Vec2) -> Result<Complex64> {
    disc.check_density(density)?;
    direct_sum(spec.kernel, spec.variant, disc, &frames_of(disc), density, x, normal)
}

/// One expansion disk tangent to the curve at node `node` of `disc`, at
/// distance `radius` along the normal on `side`, formed directly from the
/// nodes of `disc`.
pub fn tangent_disk_expansion(
    spec: &OperatorSpec,
    disc: &Discretization,
    density: &[Complex64],
    node: usize,
    side: Side,
    radius: f64,
    p: usize,
) -> Result<LocalExpansion> {
    disc.check_density(density)?;
    if node >= disc.len() {
        return Err(QbxError::InvalidArgument(format!("target node {node} out of range")));
    }
    if !(radius > 0.0) {
        return Err(QbxError::InvalidArgument(format!("disk radius must be positive, got {radius}")));
    }
    let center = ExpansionCenter {
        center: disc.points[node] + disc.normals[node] * (side.sign() * radius),
        radius,
        side,
        target: node,
        panel: node,
    };
    let view = SourceView {
        points: &disc.points,
        frames: frames_of(disc),
        weights: &disc.weights,
        panel_of: None,
    };
    form_expansion(&center, p, spec.kernel, spec.variant.source_factor(), &view, density, &[])
}

/// How computed values are produced for an error map.
pub enum FieldMethod<'a> {
    /// The discretization's own rule everywhere.
    Direct { disc: &'a Discretization, density: &'a [Complex64] },
    /// Full evaluator with disk routing.
    Routed { potential: &'a Potential, density: &'a [Complex64], p: usize },
    /// One expansion for targets inside its disk, the direct rule elsewhere.
    Disk {
        disc: &'a Discretization,
        density: &'a [Complex64],
        expansion: &'a LocalExpansion,
    },
}

impl FieldMethod<'_> {
    /// Values at `points` (normals set to zero).
    pub fn evaluate(&self, spec: &OperatorSpec, points: &[Vec2]) -> Result<Vec<Complex64>> {
        match self {
            FieldMethod::Direct { disc, density } => {
                disc.check_density(density)?;
                let frames = frames_of(disc);
                points
                    .par_iter()
                    .map(|&x| direct_sum(spec.kernel, spec.variant, disc, &frames, density, x, Vec2::ZERO))
                    .collect()
            }
            FieldMethod::Routed { potential, density, p } => {
                potential.apply(spec, density, &TargetSet::off_surface(points.to_vec()), *p)
            }
            FieldMethod::Disk { disc, density, expansion } => {
                disc.check_density(density)?;
                let frames = frames_of(disc);
                let c = expansion.center;
                points
                    .par_iter()
                    .map(|&x| {
                        if x.distance(c.center) <= c.radius {
                            expansion.eval(x, spec.variant.target_derivative(), Vec2::ZERO)
                        } else {
                            direct_sum(spec.kernel, spec.variant, disc, &frames, density, x, Vec2::ZERO)
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Reference field for an error map.
pub enum Reference<'a> {
    Oracle(&'a Oracle<'a>),
    Exact(&'a (dyn Fn(Vec2) -> Complex64 + Sync)),
    /// Precomputed values, one per grid cell in row-major order.
    Values(&'a [Complex64]),
}

/// A uniform grid of cell centers over a bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub const MAX_SIDE: usize = 512;

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nx > Self::MAX_SIDE || self.ny > Self::MAX_SIDE {
            return Err(QbxError::InvalidArgument(format!(
                "grid resolution must be between 1 and {} per side, got {}x{}",
                Self::MAX_SIDE,
                self.nx,
                self.ny
            )));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(QbxError::InvalidArgument("empty bounding box".into()));
        }
        Ok(())
    }

    pub fn cell_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    /// Cell centers, row-major with `x` fastest.
    pub fn points(&self) -> Vec<Vec2> {
        let (dx, dy) = (self.cell_width(), self.cell_height());
        (0..self.ny)
            .flat_map(|iy| {
                (0..self.nx).map(move |ix| {
                    Vec2::new(self.x_min + (ix as f64 + 0.5) * dx, self.y_min + (iy as f64 + 0.5) * dy)
                })
            })
            .collect()
    }
}

/// Absolute errors over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMap {
    pub grid: GridSpec,
    pub points: Vec<Vec2>,
    /// `|computed - reference|`, NaN for skipped cells.
    pub errors: Vec<f64>,
    /// Cells closer to the curve than the skip distance.
    pub skipped: Vec<bool>,
    pub skip_distance: f64,
}

/// Floor applied to exact zeros before taking logarithms.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Serialize)]
struct Sidecar<'a> {
    grid: &'a GridSpec,
    skip_distance: f64,
    skipped_cells: usize,
    max_log10_error: f64,
    columns: [&'static str; 3],
    parameters: &'a serde_json::Value,
}

impl ErrorMap {
    pub fn log10_errors(&self) -> Vec<f64> {
        self.errors.iter().map(|&e| if e.is_nan() { e } else { e.max(LOG_FLOOR).log10() }).collect()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().filter(|e| !e.is_nan()).fold(0.0, f64::max)
    }

    /// Number of evaluated cells with error above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.errors.iter().filter(|&&e| e > threshold).count()
    }

    /// Rows `x,y,log10err`; skipped cells carry `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,log10err")?;
        for (x, l) in self.points.iter().zip(self.log10_errors()) {
            writeln!(out, "{:.17e},{:.17e},{:.6}", x.x, x.y, l)?;
        }
        Ok(())
    }

    /// Grid metadata and caller-supplied run parameters as JSON.
    pub fn sidecar_json(&self, parameters: &serde_json::Value) -> serde_json::Value {
        let max = self.max_error();
        let sidecar = Sidecar {
            grid: &self.grid,
            skip_distance: self.skip_distance,
            skipped_cells: self.skipped.iter().filter(|&&s| s).count(),
            max_log10_error: max.max(LOG_FLOOR).log10(),
            columns: ["x", "y", "log10err"],
            parameters,
        };
        serde_json::to_value(sidecar).expect("sidecar is serializable")
    }
}

/// Distance from `x` to a closed curve, measured against an inscribed
/// polygon with `samples` vertices.
pub fn distance_to_curve(curve: &Curve, x: Vec2, samples: usize) -> f64 {
    let n = samples.max(3);
    let h = curve.period() / n as f64;
    let pts: Vec<Vec2> = (0..n).map(|i| curve.eval(i as f64 * h)).collect();
    (0..n)
        .map(|i| segment_distance(x, pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn segment_distance(x: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let s = if len2 > 0.0 { ((x - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    x.distance(a + ab * s)
}

/// Errors of `method` against `reference` at the cell centers of `grid`.
/// Cells within `skip_distance` of `curve` are skipped.
pub fn error_field_map(
    spec: &OperatorSpec,
    method: &FieldMethod<'_>,
    grid: &GridSpec,
    reference: &Reference<'_>,
    curve: &Curve,
    skip_distance: f64,
) -> Result<ErrorMap> {
    grid.validate()?;
    let points = grid.points();
    let samples = 4096;
    let skipped: Vec<bool> = points
        .par_iter()
        .map(|&x| skip_distance > 0.0 && distance_to_curve(curve, x, samples) < skip_distance)
        .collect();
    let kept: Vec<Vec2> = points.iter().zip(&skipped).filter(|(_, &s)| !s).map(|(&x, _)| x).collect();
    let computed = method.evaluate(spec, &kept)?;
    let reference_vals: Vec<Complex64> = match reference {
        Reference::Oracle(o) => kept
            .par_iter()
            .map(|&x| Ok(o.adaptive_eval(&[spec.variant], x, Vec2::ZERO)?[0]))
            .collect::<Result<_>>()?,
        Reference::Exact(f) => kept.par_iter().map(|&x| f(x)).collect(),
        Reference::Values(v) => {
            check_len(points.len(), v.len())?;
            v.iter().zip(&skipped).filter(|(_, &s)| !s).map(|(&v, _)| v).collect()
        }
    };
    let mut kept_errs = computed.iter().zip(&reference_vals).map(|(a, b)| (a - b).norm());
    let errors = skipped
        .iter()
        .map(|&s| if s { f64::NAN } else { kept_errs.next().expect("one value per kept cell") })
        .collect();
    Ok(ErrorMap {
        grid: *grid,
        points,
        errors,
        skipped,
        skip_distance,
    })
}

/// Single-disk experiment on a trapezoidal discretization: a disk of radius
/// `offset` tangent to the curve at parameter `t0` on `side`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskExperiment {
    pub nodes: usize,
    pub p: usize,
    /// Parameter of the tangency point; must be a node of the grid.
    pub t0: f64,
    pub side: Side,
    /// Disk radius.
    pub offset: f64,
}

/// Polar sample of a disk: the center plus rings at fractions `radii` of
/// the radius, `angles` points per ring.
pub fn disk_samples(center: Vec2, radius: f64, radii: &[f64], angles: usize) -> Vec<Vec2> {
    let mut pts = vec![center];
    for &f in radii {
        for a in 0..angles {
            let th = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
            pts.push(center + Vec2::new(th.cos(), th.sin()) * (f * radius));
        }
    }
    pts
}

impl DiskExperiment {
    /// The grid, its node at `t0` and the expansion of `spec` with unit
    /// density.
    pub fn build(&self, curve: &Curve, kernel: Kernel, variant: Variant) -> Result<(Discretization, usize, LocalExpansion)> {
        let disc = Discretization::build_trapezoidal(curve, self.nodes)?;
        let step = curve.period() / self.nodes as f64;
        let pos = self.t0 / step;
        let node = pos.round();
        if (pos - node).abs() > 1e-9 {
            return Err(QbxError::InvalidArgument(format!(
                "tangency parameter {} is not a node of the {}-point grid",
                self.t0, self.nodes
            )));
        }
        let node = node as usize % self.nodes;
        let spec = OperatorSpec::new(kernel, variant, LimitMode::TwoSidedAverage)?;
        let ones = vec![Complex64::new(1.0, 0.0); disc.len()];
        let e = tangent_disk_expansion(&spec, &disc, &ones, node, self.side, self.offset, self.p)?;
        Ok((disc, node, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PanelOptions;
    use crate::oracle::OracleOptions;

    fn helm() -> Kernel {
        Kernel::Helmholtz { k: 0.5 }
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let disc = Discretization::build_panelization(&Curve::ellipse(1.5), PanelOptions::for_curve(&Curve::ellipse(1.5))).unwrap();
        let pot = Potential::new(disc.clone(), QbxOptions { order: 8, ..QbxOptions::default() }).unwrap();
        let zero = vec![ZERO; disc.len()];
        let spec = OperatorSpec::new(helm(), Variant::D, LimitMode::Exterior).unwrap();
        let c = pot.layout().centers(Side::Exterior)[3];
        let pts = vec![Vec2::new(5.0, 1.0), Vec2::new(0.1, 0.2), c.center, disc.points[7] + disc.normals[7] * 0.01];
        let v = pot.apply(&spec, &zero, &TargetSet::off_surface(pts), 8).unwrap();
        assert!(v.iter().all(|z| *z == ZERO));
        let on = pot.apply(&spec, &zero, &TargetSet::on_surface(&disc, vec![0, 5]).unwrap(), 8).unwrap();
        assert!(on.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn routing_picks_deepest_disk() {
        let disc = Discretization::build_panelization(&Curve::circle(1.0), PanelOptions::for_curve(&Curve::circle(1.0))).unwrap();
        let pot = Potential::new(disc, QbxOptions::default()).unwrap();
        let c = pot.layout().centers(Side::Interior)[4];
        assert_eq!(pot.route(c.center, None), Route::Expansion { side: Side::Interior, node: 4 });
        assert_eq!(pot.route(Vec2::new(0.0, 0.0), None), Route::Direct);
        assert_eq!(pot.route(c.center, Some(Side::Exterior)), Route::Direct);
    }

    #[test]
    fn self_reference_map_is_zero() {
        let curve = Curve::circle(1.0);
        let disc = Discretization::build_trapezoidal(&curve, 40).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); disc.len()];
        let spec = OperatorSpec::new(helm(), Variant::S, LimitMode::TwoSidedAverage).unwrap();
        let grid = GridSpec { x_min: -2.0, x_max: 2.0, y_min: -2.0, y_max: 2.0, nx: 8, ny: 8 };
        let method = FieldMethod::Direct { disc: &disc, density: &ones };
        let vals = method.evaluate(&spec, &grid.points()).unwrap();
        let map = error_field_map(&spec, &method, &grid, &Reference::Values(&vals), &curve, 0.0).unwrap();
        assert_eq!(map.max_error(), 0.0);
        assert!(map.skipped.iter().all(|s| !s));
    }

    #[test]
    fn disk_expansion_matches_oracle_on_bean() {
        let curve = Curve::bean();
        let h80 = crate::geometry::Discretization::build_trapezoidal(&curve, 80).unwrap().arc_length() / 80.0;
        let exp = DiskExperiment {
            nodes: 240,
            p: 12,
            t0: std::f64::consts::PI / 8.0,
            side: Side::Interior,
            offset: 3.0 * h80,
        };
        let (_, _, e) = exp.build(&curve, helm(), Variant::S).unwrap();
        let panels = Discretization::build_panelization(&curve, PanelOptions::for_curve(&curve)).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); panels.len()];
        let o = Oracle::new(helm(), &panels, &ones, OracleOptions::default()).unwrap();
        let c = e.center;
        for x in disk_samples(c.center, c.radius, &[0.5, 0.9], 6) {
            let got = e.eval(x, TargetDerivative::Value, Vec2::ZERO).unwrap();
            let want = o.adaptive_eval(&[Variant::S], x, Vec2::ZERO).unwrap()[0];
            assert!((got - want).norm() < 1e-9, "{x:?}: {got} vs {want}");
        }
    }
}
