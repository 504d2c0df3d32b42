//! Dirichlet and Neumann boundary value problems for the Helmholtz equation
//! through second-kind integral equations discretized by QBX.
//!
//! Sign conventions follow this crate's kernels (outward normal,
//! `G = (i/4) H_0`, so `D[1] = -1` inside the Laplace limit): the trace of
//! `u = alpha S sigma - D sigma` is `+sigma/2 + alpha S - D` from inside and
//! `-sigma/2 + alpha S - D` from outside, with `S` and `D` principal values.
//! The normal derivative of `u = S sigma - alpha D S_0 sigma` is
//! `+sigma/2 + S' - alpha D' S_0` from inside and `-sigma/2 + ...` from
//! outside.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::json;

use super::gmres::{gmres, GmresOptions, GmresResult};
use crate::error::{QbxError, Result};
use crate::geometry::{Curve, Discretization};
use crate::kernels::{GreenDerivatives, Kernel, LimitMode, OperatorSpec, Side, Variant};
use crate::point::Vec2;
use crate::potential::{Potential, TargetSet};
use crate::qbx::{Combination, Limit, QbxOptions};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Distance from the curve beyond which a `q`-point Gauss rule on panels
/// of length `h` is accurate to about 1e-15: the Bernstein ellipse through
/// the target has parameter `rho` with `rho^(-2q) = 1e-15`.
pub fn smooth_rule_clearance(h: f64, q: usize) -> f64 {
    0.5 * h * (17.3 / q.max(1) as f64).sinh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Dirichlet,
    Neumann,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Dirichlet => "dirichlet",
            Condition::Neumann => "neumann",
        }
    }
}

/// Which limit of the double-layer term enters the system: `D` for
/// Dirichlet problems, `D'` for Neumann problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoubleLayerLimit {
    TwoSided,
    /// The limit from the side of the problem's domain.
    OneSided,
}

/// A monopole source of the manufactured field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charge {
    pub position: Vec2,
    pub strength: Complex64,
}

/// A boundary value problem in the region on `side` of the curve.
#[derive(Debug, Clone)]
pub struct BvpProblem {
    pub disc: Discretization,
    pub condition: Condition,
    pub side: Side,
    pub k: f64,
    pub alpha: Complex64,
    /// Dirichlet or Neumann data at the nodes.
    pub data: Vec<Complex64>,
    /// Sources of the manufactured solution, if any.
    pub charges: Vec<Charge>,
}

impl BvpProblem {
    pub fn new(disc: Discretization, condition: Condition, side: Side, k: f64, data: Vec<Complex64>) -> Result<Self> {
        Kernel::helmholtz(k)?;
        disc.check_density(&data)?;
        Ok(BvpProblem {
            disc,
            condition,
            side,
            k,
            alpha: Complex64::new(0.0, 1.0),
            data,
            charges: Vec::new(),
        })
    }

    /// Boundary data of the field radiated by `charges`, which must lie on
    /// the side opposite `side`.
    pub fn manufactured(disc: Discretization, condition: Condition, side: Side, k: f64, charges: Vec<Charge>) -> Result<Self> {
        let kernel = Kernel::helmholtz(k)?;
        for c in &charges {
            if region_side(disc.curve(), c.position) == side {
                return Err(QbxError::InvalidArgument(format!(
                    "charge at ({}, {}) lies in the solution domain",
                    c.position.x, c.position.y
                )));
            }
        }
        let data = (0..disc.len())
            .map(|j| {
                let (u, grad) = charge_field(kernel, &charges, disc.points[j])?;
                Ok(match condition {
                    Condition::Dirichlet => u,
                    Condition::Neumann => grad[0] * disc.normals[j].x + grad[1] * disc.normals[j].y,
                })
            })
            .collect::<Result<_>>()?;
        Ok(BvpProblem {
            disc,
            condition,
            side,
            k,
            alpha: Complex64::new(0.0, 1.0),
            data,
            charges,
        })
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::Helmholtz { k: self.k }
    }

    /// Value of the manufactured field at `x`.
    pub fn exact_field(&self, x: Vec2) -> Result<Complex64> {
        Ok(charge_field(self.kernel(), &self.charges, x)?.0)
    }
}

fn charge_field(kernel: Kernel, charges: &[Charge], x: Vec2) -> Result<(Complex64, [Complex64; 2])> {
    let mut u = ZERO;
    let mut g = [ZERO; 2];
    for c in charges {
        let gd = GreenDerivatives::new(kernel, x - c.position)?;
        u += c.strength * gd.value;
        g[0] += c.strength * gd.grad[0];
        g[1] += c.strength * gd.grad[1];
    }
    Ok((u, g))
}

fn region_side(curve: &Curve, x: Vec2) -> Side {
    if curve.winding_number(x, 4000).abs() > 0.5 {
        Side::Interior
    } else {
        Side::Exterior
    }
}

/// Smallest and largest distance from the curve's interior point to the
/// curve.
pub fn inradius_circumradius(curve: &Curve) -> (f64, f64) {
    let c = curve.interior_point();
    let n = 4096;
    (0..n)
        .map(|i| curve.eval(i as f64 * curve.period() / n as f64).distance(c))
        .fold((f64::INFINITY, 0.0), |(lo, hi), d| (lo.min(d), hi.max(d)))
}

fn ring(center: Vec2, radius: f64, count: usize, phase: f64) -> Vec<Vec2> {
    (0..count)
        .map(|j| {
            let th = phase + 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            center + Vec2::new(th.cos(), th.sin()) * radius
        })
        .collect()
}

/// Three unit charges at 120 degrees on the side opposite `side`: at twice
/// the circumradius for interior problems, half the inradius for exterior
/// ones.
pub fn standard_charges(curve: &Curve, side: Side) -> Vec<Charge> {
    let (rin, rout) = inradius_circumradius(curve);
    let radius = match side {
        Side::Interior => 2.0 * rout,
        Side::Exterior => 0.5 * rin,
    };
    ring(curve.interior_point(), radius, 3, 0.25)
        .into_iter()
        .map(|position| Charge {
            position,
            strength: Complex64::new(1.0, 0.0),
        })
        .collect()
}

/// Eight observation points on `side`, on the circle the charges would use
/// for the opposite problem.
pub fn standard_observation_points(curve: &Curve, side: Side) -> Vec<Vec2> {
    let (rin, rout) = inradius_circumradius(curve);
    let radius = match side {
        Side::Interior => 0.5 * rin,
        Side::Exterior => 2.0 * rout,
    };
    ring(curve.interior_point(), radius, 8, 0.1)
}

/// Discretization parameters of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub qbx: QbxOptions,
    pub gmres: GmresOptions,
    /// Solve for `sqrt(w) sigma` instead of `sigma`.
    pub sqrt_weights: bool,
    pub d_limit: DoubleLayerLimit,
    pub dp_limit: DoubleLayerLimit,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            qbx: QbxOptions::default(),
            gmres: GmresOptions::default(),
            sqrt_weights: true,
            d_limit: DoubleLayerLimit::TwoSided,
            dp_limit: DoubleLayerLimit::OneSided,
        }
    }
}

impl SolveOptions {
    pub fn with_order(p: usize) -> Self {
        SolveOptions {
            qbx: QbxOptions {
                order: p,
                ..QbxOptions::default()
            },
            ..SolveOptions::default()
        }
    }

    pub fn order(&self) -> usize {
        self.qbx.order
    }
}

fn limit_of(l: DoubleLayerLimit, side: Side) -> Limit {
    match l {
        DoubleLayerLimit::TwoSided => Limit::TwoSided,
        DoubleLayerLimit::OneSided => Limit::OneSided(side),
    }
}

/// Coefficient of the identity in the boundary equation when the layer
/// terms are principal values.
fn half_jump(side: Side) -> f64 {
    match side {
        Side::Interior => 0.5,
        Side::Exterior => -0.5,
    }
}

fn dirichlet_combination(problem: &BvpProblem) -> Combination {
    Combination {
        kernel: problem.kernel(),
        terms: vec![(problem.alpha, Variant::S), (Complex64::new(-1.0, 0.0), Variant::D)],
    }
}

fn check_problem(problem: &BvpProblem, potential: &Potential) -> Result<()> {
    if potential.disc().len() != problem.disc.len() {
        return Err(QbxError::DimensionMismatch {
            expected: problem.disc.len(),
            got: potential.disc().len(),
        });
    }
    Ok(())
}

/// Applies the Dirichlet boundary operator to `sigma` without assembling it.
pub fn apply_dirichlet_operator(
    problem: &BvpProblem,
    potential: &Potential,
    sigma: &[Complex64],
    p: usize,
    d_limit: DoubleLayerLimit,
) -> Result<Vec<Complex64>> {
    check_problem(problem, potential)?;
    let limit = limit_of(d_limit, problem.side);
    let mut v = potential.layout().apply(&dirichlet_combination(problem), limit, sigma, p)?;
    if d_limit == DoubleLayerLimit::TwoSided {
        let c = half_jump(problem.side);
        v.iter_mut().zip(sigma).for_each(|(a, s)| *a += c * s);
    }
    Ok(v)
}

/// Applies the Neumann boundary operator to `sigma` without assembling it.
pub fn apply_neumann_operator(
    problem: &BvpProblem,
    potential: &Potential,
    sigma: &[Complex64],
    p: usize,
    dp_limit: DoubleLayerLimit,
) -> Result<Vec<Complex64>> {
    check_problem(problem, potential)?;
    let layout = potential.layout();
    let tau = layout.apply(&Combination::single(Kernel::Laplace, Variant::S), Limit::TwoSided, sigma, p)?;
    let dp = layout.apply(
        &Combination::single(problem.kernel(), Variant::Dp),
        limit_of(dp_limit, problem.side),
        &tau,
        p,
    )?;
    let sp = layout.apply(&Combination::single(problem.kernel(), Variant::Sp), Limit::TwoSided, sigma, p)?;
    let c = half_jump(problem.side);
    Ok((0..sigma.len())
        .map(|j| c * sigma[j] + sp[j] - problem.alpha * dp[j])
        .collect())
}

/// Dense single-operator matrices of one discretization at one expansion
/// order, from which the boundary operators of both conditions on both
/// sides are formed.
#[derive(Debug, Clone)]
pub struct OperatorBlocks {
    k: f64,
    n: usize,
    blocks: Vec<(Kernel, Variant, Limit, DMatrix<Complex64>)>,
    pub assembly_seconds: f64,
}

impl OperatorBlocks {
    /// Assembles every block needed by `conditions` on `sides` for the
    /// wavenumber `k`.
    pub fn assemble(potential: &Potential, k: f64, opts: &SolveOptions, conditions: &[Condition], sides: &[Side]) -> Result<Self> {
        let t0 = Instant::now();
        let kernel = Kernel::helmholtz(k)?;
        let layout = potential.layout();
        let p = opts.order();
        let mut requests: Vec<(Variant, Limit)> = Vec::new();
        for &condition in conditions {
            for &side in sides {
                let pair = match condition {
                    Condition::Dirichlet => [(Variant::S, Limit::TwoSided), (Variant::D, limit_of(opts.d_limit, side))],
                    Condition::Neumann => [(Variant::Sp, Limit::TwoSided), (Variant::Dp, limit_of(opts.dp_limit, side))],
                };
                for r in pair {
                    if !requests.contains(&r) {
                        requests.push(r);
                    }
                }
            }
        }
        let mats = layout.assemble_many(kernel, &requests, p)?;
        let mut blocks: Vec<_> = requests.iter().zip(mats).map(|(&(v, l), m)| (kernel, v, l, m)).collect();
        if conditions.contains(&Condition::Neumann) {
            let s0 = layout.assemble_many(Kernel::Laplace, &[(Variant::S, Limit::TwoSided)], p)?;
            blocks.extend(s0.into_iter().map(|m| (Kernel::Laplace, Variant::S, Limit::TwoSided, m)));
        }
        Ok(OperatorBlocks {
            k,
            n: potential.disc().len(),
            blocks,
            assembly_seconds: t0.elapsed().as_secs_f64(),
        })
    }

    pub fn get(&self, kernel: Kernel, variant: Variant, limit: Limit) -> Result<&DMatrix<Complex64>> {
        self.blocks
            .iter()
            .find(|b| b.0 == kernel && b.1 == variant && b.2 == limit)
            .map(|b| &b.3)
            .ok_or_else(|| QbxError::InvalidArgument(format!("no {variant:?} block with limit {limit:?} was assembled")))
    }

    /// The boundary operator of `problem`.
    pub fn operator(&self, problem: &BvpProblem, opts: &SolveOptions) -> Result<BoundaryOperator<'_>> {
        if problem.disc.len() != self.n {
            return Err(QbxError::DimensionMismatch {
                expected: self.n,
                got: problem.disc.len(),
            });
        }
        if problem.k != self.k {
            return Err(QbxError::InvalidArgument(format!(
                "blocks were assembled for k = {}, not {}",
                self.k, problem.k
            )));
        }
        let kernel = problem.kernel();
        let c = half_jump(problem.side);
        match problem.condition {
            Condition::Dirichlet => {
                let s = self.get(kernel, Variant::S, Limit::TwoSided)?;
                let d = self.get(kernel, Variant::D, limit_of(opts.d_limit, problem.side))?;
                let mut main = s * problem.alpha - d;
                if opts.d_limit == DoubleLayerLimit::TwoSided {
                    for j in 0..self.n {
                        main[(j, j)] += c;
                    }
                }
                Ok(BoundaryOperator { main, product: None })
            }
            Condition::Neumann => {
                let mut main = self.get(kernel, Variant::Sp, Limit::TwoSided)?.clone();
                for j in 0..self.n {
                    main[(j, j)] += c;
                }
                let dp = self.get(kernel, Variant::Dp, limit_of(opts.dp_limit, problem.side))?;
                let s0 = self.get(Kernel::Laplace, Variant::S, Limit::TwoSided)?;
                Ok(BoundaryOperator {
                    main,
                    product: Some((-problem.alpha, dp, s0)),
                })
            }
        }
    }
}

/// `main + coef * a * b`, with the product applied factor by factor.
#[derive(Debug, Clone)]
pub struct BoundaryOperator<'a> {
    main: DMatrix<Complex64>,
    product: Option<(Complex64, &'a DMatrix<Complex64>, &'a DMatrix<Complex64>)>,
}

impl BoundaryOperator<'_> {
    pub fn len(&self) -> usize {
        self.main.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.main.nrows() == 0
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let x = DVector::from_column_slice(v);
        let mut y = &self.main * &x;
        if let Some((coef, a, b)) = self.product {
            y += (a * (b * &x)) * coef;
        }
        out.copy_from_slice(y.as_slice());
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self.product {
            None => self.main.clone(),
            Some((coef, a, b)) => &self.main + (a * b) * coef,
        }
    }
}

/// The boundary operator of a problem as a dense matrix acting on nodal
/// densities.
pub fn assemble_operator(problem: &BvpProblem, potential: &Potential, opts: &SolveOptions) -> Result<DMatrix<Complex64>> {
    check_problem(problem, potential)?;
    let blocks = OperatorBlocks::assemble(potential, problem.k, opts, &[problem.condition], &[problem.side])?;
    Ok(blocks.operator(problem, opts)?.to_dense())
}

/// Solves `A sigma = rhs` by GMRES with `apply(v, out)` writing `A v`,
/// optionally in the variables `sqrt(w) sigma`.
pub fn solve_with<F>(
    mut apply: F,
    weights: &[f64],
    rhs: &[Complex64],
    sqrt_weights: bool,
    opts: GmresOptions,
) -> Result<(Vec<Complex64>, GmresResult)>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = rhs.len();
    if weights.len() != n {
        return Err(QbxError::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    let s: Vec<f64> = if sqrt_weights {
        weights.iter().map(|w| w.sqrt()).collect()
    } else {
        vec![1.0; n]
    };
    let b: Vec<Complex64> = rhs.iter().zip(&s).map(|(f, si)| f * si).collect();
    let mut unscaled = vec![ZERO; n];
    let res = gmres(
        |v, out| {
            unscaled.iter_mut().zip(v.iter().zip(&s)).for_each(|(u, (x, si))| *u = x / si);
            apply(&unscaled, out);
            out.iter_mut().zip(&s).for_each(|(o, si)| *o *= si);
            Ok(())
        },
        &b,
        opts,
    )?;
    let sigma = res.x.iter().zip(&s).map(|(y, si)| y / si).collect();
    Ok((sigma, res))
}

/// Solves `matrix sigma = rhs` by GMRES, optionally in the variables
/// `sqrt(w) sigma`.
pub fn solve_system(
    matrix: &DMatrix<Complex64>,
    weights: &[f64],
    rhs: &[Complex64],
    sqrt_weights: bool,
    opts: GmresOptions,
) -> Result<(Vec<Complex64>, GmresResult)> {
    let n = rhs.len();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(QbxError::DimensionMismatch {
            expected: n,
            got: matrix.nrows(),
        });
    }
    solve_with(
        |v, out| {
            let y = matrix * DVector::from_column_slice(v);
            out.copy_from_slice(y.as_slice());
        },
        weights,
        rhs,
        sqrt_weights,
        opts,
    )
}

/// Field of the problem's representation with density `sigma` at points
/// away from the curve.
pub fn evaluate_representation(
    problem: &BvpProblem,
    potential: &Potential,
    sigma: &[Complex64],
    p: usize,
    points: &[Vec2],
) -> Result<Vec<Complex64>> {
    evaluate_with(problem, potential, sigma, None, p, points)
}

/// As [`evaluate_representation`], reusing `tau = S_0 sigma` when given.
fn evaluate_with(
    problem: &BvpProblem,
    potential: &Potential,
    sigma: &[Complex64],
    tau: Option<Vec<Complex64>>,
    p: usize,
    points: &[Vec2],
) -> Result<Vec<Complex64>> {
    check_problem(problem, potential)?;
    let kernel = problem.kernel();
    let spec = |v| OperatorSpec::new(kernel, v, LimitMode::TwoSidedAverage);
    let targets = TargetSet::off_surface(points.to_vec());
    match problem.condition {
        Condition::Dirichlet => {
            let s = potential.apply(&spec(Variant::S)?, sigma, &targets, p)?;
            let d = potential.apply(&spec(Variant::D)?, sigma, &targets, p)?;
            Ok(s.iter().zip(&d).map(|(s, d)| problem.alpha * s - d).collect())
        }
        Condition::Neumann => {
            let tau = match tau {
                Some(t) => t,
                None => potential
                    .layout()
                    .apply(&Combination::single(Kernel::Laplace, Variant::S), Limit::TwoSided, sigma, p)?,
            };
            let s = potential.apply(&spec(Variant::S)?, sigma, &targets, p)?;
            let d = potential.apply(&spec(Variant::D)?, &tau, &targets, p)?;
            Ok(s.iter().zip(&d).map(|(s, d)| s - problem.alpha * d).collect())
        }
    }
}

/// Outcome of one boundary value solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub density: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub observation_points: Vec<Vec2>,
    pub computed: Vec<Complex64>,
    /// Absolute errors against the manufactured field, when there is one.
    pub errors: Vec<f64>,
    pub l2_relative_error: f64,
    pub linf_relative_error: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

fn cjson(z: &Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

impl SolveReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "residual_history": self.residual_history,
            "l2_relative_error": self.l2_relative_error,
            "linf_relative_error": self.linf_relative_error,
            "observation_points": self.observation_points.iter().map(|x| [x.x, x.y]).collect::<Vec<_>>(),
            "computed": self.computed.iter().map(cjson).collect::<Vec<_>>(),
            "errors": self.errors,
            "density": self.density.iter().map(cjson).collect::<Vec<_>>(),
            "timing": { "assembly_seconds": self.assembly_seconds, "solve_seconds": self.solve_seconds },
        })
    }
}

/// Checks that observation points lie in the problem's domain, clear of the
/// curve.
pub fn check_observation_points(problem: &BvpProblem, oversampling: usize, points: &[Vec2]) -> Result<()> {
    let q = problem.disc.nodes_per_panel() * oversampling;
    let min_dist = smooth_rule_clearance(problem.disc.max_panel_length(), q);
    for &x in points {
        if region_side(problem.disc.curve(), x) != problem.side {
            return Err(QbxError::InvalidArgument(format!(
                "observation point ({}, {}) is outside the solution domain",
                x.x, x.y
            )));
        }
        let d = problem.disc.points.iter().map(|y| y.distance(x)).fold(f64::INFINITY, f64::min);
        if d < min_dist {
            return Err(QbxError::InvalidArgument(format!(
                "observation point ({}, {}) is {d:.3e} from the curve, closer than {min_dist:.3e}",
                x.x, x.y
            )));
        }
    }
    Ok(())
}

/// Assembles and solves the problem, then evaluates the representation at
/// `observation` and compares with the manufactured field.
pub fn solve_bvp(problem: &BvpProblem, opts: &SolveOptions, observation: &[Vec2]) -> Result<SolveReport> {
    let potential = Potential::new(problem.disc.clone(), opts.qbx)?;
    let blocks = OperatorBlocks::assemble(&potential, problem.k, opts, &[problem.condition], &[problem.side])?;
    solve_bvp_with(problem, &potential, &blocks, opts, observation)
}

/// As [`solve_bvp`] with the potential and operator blocks already built.
pub fn solve_bvp_with(
    problem: &BvpProblem,
    potential: &Potential,
    blocks: &OperatorBlocks,
    opts: &SolveOptions,
    observation: &[Vec2],
) -> Result<SolveReport> {
    check_problem(problem, potential)?;
    check_observation_points(problem, opts.qbx.oversampling, observation)?;
    let t1 = Instant::now();
    let op = blocks.operator(problem, opts)?;
    let (density, res) = solve_with(|v, out| op.apply(v, out), &problem.disc.weights, &problem.data, opts.sqrt_weights, opts.gmres)?;
    let tau = match problem.condition {
        Condition::Neumann => {
            let s0 = blocks.get(Kernel::Laplace, Variant::S, Limit::TwoSided)?;
            Some((s0 * DVector::from_column_slice(&density)).as_slice().to_vec())
        }
        Condition::Dirichlet => None,
    };
    let computed = evaluate_with(problem, potential, &density, tau, opts.order(), observation)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    let assembly_seconds = blocks.assembly_seconds;
    let exact: Vec<Complex64> = observation.iter().map(|&x| problem.exact_field(x)).collect::<Result<_>>()?;
    let errors: Vec<f64> = computed.iter().zip(&exact).map(|(a, b)| (a - b).norm()).collect();
    let l2_exact = exact.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let linf_exact = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let l2_err = errors.iter().map(|e| e * e).sum::<f64>().sqrt();
    let linf_err = errors.iter().copied().fold(0.0, f64::max);
    let rel = |e: f64, r: f64| if r > 0.0 { e / r } else { e };
    Ok(SolveReport {
        iterations: res.iterations,
        residual: res.final_residual(),
        converged: res.converged,
        residual_history: res.residuals.clone(),
        density,
        observation_points: observation.to_vec(),
        computed,
        errors,
        l2_relative_error: rel(l2_err, l2_exact),
        linf_relative_error: rel(linf_err, linf_exact),
        assembly_seconds,
        solve_seconds,
    })
}
