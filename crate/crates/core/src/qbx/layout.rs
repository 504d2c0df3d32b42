//! On-surface QBX: per-target rows of the discretized operator, one-sided
//! and two-sided limits, and dense operator assembly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::centers::{place_centers, CenterOptions, ExpansionCenter};
use super::expansion::{Expander, FactorScratch};
use super::jump::{jump_matrix, jump_term};
use crate::error::{QbxError, Result};
use crate::geometry::{Discretization, SourceGrid};
use crate::kernels::{Frame, Kernel, LimitMode, OperatorSpec, Side, SourceFactor, TargetDerivative, Variant};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Parameters of the QBX discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbxOptions {
    /// Expansion order `p`.
    pub order: usize,
    /// Source oversampling factor.
    pub oversampling: usize,
    pub centers: CenterOptions,
}

impl Default for QbxOptions {
    fn default() -> Self {
        QbxOptions {
            order: 16,
            oversampling: 6,
            centers: CenterOptions::default(),
        }
    }
}

/// A linear combination `sum coef * variant` sharing one kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub kernel: Kernel,
    pub terms: Vec<(Complex64, Variant)>,
}

impl Combination {
    pub fn single(kernel: Kernel, variant: Variant) -> Self {
        Combination {
            kernel,
            terms: vec![(Complex64::new(1.0, 0.0), variant)],
        }
    }
}

/// Which boundary limit a row represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    OneSided(Side),
    TwoSided,
}

/// Target grid, oversampled source grid and both families of centers.
#[derive(Debug, Clone)]
pub struct QbxLayout {
    target: Discretization,
    source: SourceGrid,
    source_frames: Vec<Frame>,
    interior: Vec<ExpansionCenter>,
    exterior: Vec<ExpansionCenter>,
    options: QbxOptions,
}

impl QbxLayout {
    pub fn new(target: Discretization, options: QbxOptions) -> Result<Self> {
        let source = SourceGrid::new(&target, options.oversampling)?;
        let (source, mut centers) =
            place_centers(&target, source, &[Side::Interior, Side::Exterior], options.centers)?;
        let exterior = centers.pop().expect("two sides requested");
        let interior = centers.pop().expect("two sides requested");
        let source_frames = source
            .disc
            .tangents
            .iter()
            .zip(&source.disc.normals)
            .map(|(&tangent, &normal)| Frame { tangent, normal })
            .collect();
        Ok(QbxLayout {
            target,
            source,
            source_frames,
            interior,
            exterior,
            options,
        })
    }

    pub fn target(&self) -> &Discretization {
        &self.target
    }

    pub fn source(&self) -> &SourceGrid {
        &self.source
    }

    pub fn source_frames(&self) -> &[Frame] {
        &self.source_frames
    }

    pub fn options(&self) -> &QbxOptions {
        &self.options
    }

    pub fn order(&self) -> usize {
        self.options.order
    }

    pub fn centers(&self, side: Side) -> &[ExpansionCenter] {
        match side {
            Side::Interior => &self.interior,
            Side::Exterior => &self.exterior,
        }
    }

    /// Row of the one-sided operator at target `j`, over source nodes:
    /// `value_j = sum_s row[s] * density_source[s]`. `scale` multiplies the
    /// row before it is added into `row`.
    fn accumulate_row(
        &self,
        comb: &Combination,
        side: Side,
        j: usize,
        p: usize,
        scale: Complex64,
        row: &mut [Complex64],
        work: &mut RowWork,
    ) -> Result<()> {
        let ex = Expander::new(comb.kernel, p);
        let c = self.centers(side)[j];
        let n_t = self.target.normals[j];
        let len = ex.len();
        // distinct target derivatives and source factors
        work.derivs.clear();
        work.factors.clear();
        for &(_, v) in &comb.terms {
            if !work.derivs.contains(&v.target_derivative()) {
                work.derivs.push(v.target_derivative());
            }
            if !work.factors.contains(&v.source_factor()) {
                work.factors.push(v.source_factor());
            }
        }
        work.e.resize(work.derivs.len() * len, ZERO);
        for (i, &d) in work.derivs.iter().enumerate() {
            ex.target_functional(c.center, self.target.points[j], d, n_t, &mut work.e[i * len..(i + 1) * len])?;
        }
        // combined functional per source factor: sum over terms of coef * E
        let nf = work.factors.len();
        work.comb.clear();
        work.comb.resize(nf * len, ZERO);
        for &(coef, v) in &comb.terms {
            let di = work.derivs.iter().position(|&d| d == v.target_derivative()).unwrap();
            let fi = work.factors.iter().position(|&f| f == v.source_factor()).unwrap();
            for l in 0..len {
                work.comb[fi * len + l] += coef * work.e[di * len + l];
            }
        }
        let pref = ex.prefactor() * scale;
        work.f.resize(nf * len, ZERO);
        let src = &self.source.disc;
        for s in 0..src.len() {
            ex.source_factors_multi(
                c.center,
                src.points[s],
                self.source_frames[s],
                &work.factors,
                &mut work.f,
                &mut work.scratch,
            )?;
            let mut acc = ZERO;
            for i in 0..nf * len {
                acc += work.comb[i] * work.f[i];
            }
            row[s] += pref * src.weights[s] * acc;
        }
        Ok(())
    }

    fn full_row(&self, comb: &Combination, limit: Limit, j: usize, p: usize, row: &mut [Complex64], work: &mut RowWork) -> Result<()> {
        row.iter_mut().for_each(|v| *v = ZERO);
        match limit {
            Limit::OneSided(side) => self.accumulate_row(comb, side, j, p, Complex64::new(1.0, 0.0), row, work),
            Limit::TwoSided => {
                let half = Complex64::new(0.5, 0.0);
                self.accumulate_row(comb, Side::Interior, j, p, half, row, work)?;
                self.accumulate_row(comb, Side::Exterior, j, p, half, row, work)
            }
        }
    }

    /// Applies the combination on the surface for the given limit.
    pub fn apply(&self, comb: &Combination, limit: Limit, density: &[Complex64], p: usize) -> Result<Vec<Complex64>> {
        check_kernel(comb)?;
        let fine = self.source.resample(density)?;
        let n_src = self.source.len();
        (0..self.target.len())
            .into_par_iter()
            .map_init(
                || (vec![ZERO; n_src], RowWork::default()),
                |(row, work), j| {
                    self.full_row(comb, limit, j, p, row, work)?;
                    Ok(row.iter().zip(&fine).map(|(a, b)| a * b).sum())
                },
            )
            .collect()
    }

    /// Values of several single operators of one kernel at the target nodes
    /// `nodes`, sharing the special-function work; result is indexed
    /// `[variant][node]`.
    pub fn apply_variants_at(
        &self,
        kernel: Kernel,
        variants: &[Variant],
        limit: Limit,
        density: &[Complex64],
        p: usize,
        nodes: &[usize],
    ) -> Result<Vec<Vec<Complex64>>> {
        for &v in variants {
            OperatorSpec::new(kernel, v, LimitMode::TwoSidedAverage)?;
        }
        if let Some(&j) = nodes.iter().find(|&&j| j >= self.target.len()) {
            return Err(QbxError::InvalidArgument(format!("target node {j} out of range")));
        }
        let fine = self.source.resample(density)?;
        let weighted: Vec<Complex64> = fine.iter().zip(&self.source.disc.weights).map(|(a, w)| a * w).collect();
        let sides: Vec<(Side, f64)> = match limit {
            Limit::OneSided(s) => vec![(s, 1.0)],
            Limit::TwoSided => vec![(Side::Interior, 0.5), (Side::Exterior, 0.5)],
        };
        let mut derivs: Vec<TargetDerivative> = Vec::new();
        let mut factors: Vec<SourceFactor> = Vec::new();
        for &v in variants {
            if !derivs.contains(&v.target_derivative()) {
                derivs.push(v.target_derivative());
            }
            if !factors.contains(&v.source_factor()) {
                factors.push(v.source_factor());
            }
        }
        let map: Vec<(usize, usize)> = variants
            .iter()
            .map(|v| {
                (
                    derivs.iter().position(|&d| d == v.target_derivative()).unwrap(),
                    factors.iter().position(|&f| f == v.source_factor()).unwrap(),
                )
            })
            .collect();
        let ex = Expander::new(kernel, p);
        let len = ex.len();
        let src = &self.source.disc;
        let per_node: Vec<Vec<Complex64>> = nodes
            .par_iter()
            .map_init(
                || (vec![ZERO; derivs.len() * len], vec![ZERO; factors.len() * len], FactorScratch::default()),
                |(e, f, scratch), &j| {
                    let mut vals = vec![ZERO; variants.len()];
                    for &(side, weight) in &sides {
                        let c = self.centers(side)[j];
                        for (i, &d) in derivs.iter().enumerate() {
                            ex.target_functional(c.center, self.target.points[j], d, self.target.normals[j], &mut e[i * len..(i + 1) * len])?;
                        }
                        let mut acc = vec![ZERO; variants.len()];
                        for s in 0..src.len() {
                            ex.source_factors_multi(c.center, src.points[s], self.source_frames[s], &factors, f, scratch)?;
                            for (a, &(di, fi)) in acc.iter_mut().zip(&map) {
                                let dot: Complex64 = e[di * len..(di + 1) * len]
                                    .iter()
                                    .zip(&f[fi * len..(fi + 1) * len])
                                    .map(|(x, y)| x * y)
                                    .sum();
                                *a += dot * weighted[s];
                            }
                        }
                        let pref = ex.prefactor() * weight;
                        vals.iter_mut().zip(&acc).for_each(|(v, a)| *v += pref * a);
                    }
                    Ok(vals)
                },
            )
            .collect::<Result<_>>()?;
        Ok((0..variants.len()).map(|i| per_node.iter().map(|v| v[i]).collect()).collect())
    }

    /// Dense matrix of the combination acting on target-grid densities.
    pub fn assemble(&self, comb: &Combination, limit: Limit, p: usize) -> Result<DMatrix<Complex64>> {
        check_kernel(comb)?;
        let n = self.target.len();
        let n_src = self.source.len();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![ZERO; n_src], RowWork::default()),
                |(row, work), j| {
                    self.full_row(comb, limit, j, p, row, work)?;
                    let mut pulled = vec![ZERO; n];
                    self.source.pull_back_row(row, &mut pulled);
                    Ok(pulled)
                },
            )
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, k| rows[i][k]))
    }

    /// Dense matrices of several single operators of one kernel, each under
    /// its own geometric limit, sharing the special-function work per
    /// center and source.
    pub fn assemble_many(&self, kernel: Kernel, requests: &[(Variant, Limit)], p: usize) -> Result<Vec<DMatrix<Complex64>>> {
        for &(v, _) in requests {
            OperatorSpec::new(kernel, v, LimitMode::TwoSidedAverage)?;
        }
        let mut derivs: Vec<TargetDerivative> = Vec::new();
        let mut factors: Vec<SourceFactor> = Vec::new();
        for &(v, _) in requests {
            if !derivs.contains(&v.target_derivative()) {
                derivs.push(v.target_derivative());
            }
            if !factors.contains(&v.source_factor()) {
                factors.push(v.source_factor());
            }
        }
        // (request, derivative, factor, weight) per side
        let per_side: Vec<(Side, Vec<(usize, usize, usize, f64)>)> = [Side::Interior, Side::Exterior]
            .iter()
            .map(|&side| {
                let uses = requests
                    .iter()
                    .enumerate()
                    .filter_map(|(r, &(v, limit))| {
                        let w = match limit {
                            Limit::TwoSided => 0.5,
                            Limit::OneSided(s) if s == side => 1.0,
                            Limit::OneSided(_) => return None,
                        };
                        let di = derivs.iter().position(|&d| d == v.target_derivative()).unwrap();
                        let fi = factors.iter().position(|&f| f == v.source_factor()).unwrap();
                        Some((r, di, fi, w))
                    })
                    .collect();
                (side, uses)
            })
            .collect();
        let ex = Expander::new(kernel, p);
        let len = ex.len();
        let n = self.target.len();
        let src = &self.source.disc;
        let n_src = src.len();
        let pref = ex.prefactor();
        let mut mats = vec![DMatrix::from_element(n, n, ZERO); requests.len()];
        // Rows in blocks to bound the temporary storage.
        let block = 64;
        for start in (0..n).step_by(block) {
            let end = (start + block).min(n);
            let rows: Vec<Vec<Vec<Complex64>>> = (start..end)
                .into_par_iter()
                .map_init(
                    || (vec![ZERO; derivs.len() * len], vec![ZERO; factors.len() * len], FactorScratch::default()),
                    |(e, f, scratch), j| {
                        let mut rows = vec![vec![ZERO; n_src]; requests.len()];
                        for (side, uses) in &per_side {
                            if uses.is_empty() {
                                continue;
                            }
                            let c = self.centers(*side)[j];
                            for (i, &d) in derivs.iter().enumerate() {
                                ex.target_functional(c.center, self.target.points[j], d, self.target.normals[j], &mut e[i * len..(i + 1) * len])?;
                            }
                            for s in 0..n_src {
                                ex.source_factors_multi(c.center, src.points[s], self.source_frames[s], &factors, f, scratch)?;
                                let ws = pref * src.weights[s];
                                for &(r, di, fi, w) in uses {
                                    let dot: Complex64 = e[di * len..(di + 1) * len]
                                        .iter()
                                        .zip(&f[fi * len..(fi + 1) * len])
                                        .map(|(x, y)| x * y)
                                        .sum();
                                    rows[r][s] += dot * ws * w;
                                }
                            }
                        }
                        let mut pulled = Vec::with_capacity(requests.len());
                        for row in &rows {
                            let mut out = vec![ZERO; n];
                            self.source.pull_back_row(row, &mut out);
                            pulled.push(out);
                        }
                        Ok(pulled)
                    },
                )
                .collect::<Result<_>>()?;
            for (j, per_req) in (start..end).zip(rows) {
                for (m, row) in mats.iter_mut().zip(per_req) {
                    for (k, v) in row.into_iter().enumerate() {
                        m[(j, k)] = v;
                    }
                }
            }
        }
        Ok(mats)
    }

    /// Value of a single operator under its limit mode.
    pub fn limit_value(&self, spec: &OperatorSpec, density: &[Complex64], p: usize) -> Result<Vec<Complex64>> {
        let comb = Combination::single(spec.kernel, spec.variant);
        let (limit, jump) = resolve_mode(spec.limit_mode);
        let mut v = self.apply(&comb, limit, density, p)?;
        if let Some(side) = jump {
            let j = jump_term(spec.variant, side, &self.target, density)?;
            v.iter_mut().zip(j).for_each(|(a, b)| *a += b);
        }
        Ok(v)
    }

    /// Dense matrix of a single operator under its limit mode.
    pub fn limit_matrix(&self, spec: &OperatorSpec, p: usize) -> Result<DMatrix<Complex64>> {
        let comb = Combination::single(spec.kernel, spec.variant);
        let (limit, jump) = resolve_mode(spec.limit_mode);
        let mut m = self.assemble(&comb, limit, p)?;
        if let Some(side) = jump {
            m += jump_matrix(spec.variant, side, &self.target)?;
        }
        Ok(m)
    }
}

fn check_kernel(comb: &Combination) -> Result<()> {
    for &(_, v) in &comb.terms {
        OperatorSpec::new(comb.kernel, v, LimitMode::TwoSidedAverage)?;
    }
    if comb.terms.is_empty() {
        return Err(QbxError::InvalidArgument("empty operator combination".into()));
    }
    Ok(())
}

/// Geometric limit and optional jump correction for a limit mode.
pub fn resolve_mode(mode: LimitMode) -> (Limit, Option<Side>) {
    match mode {
        LimitMode::Interior => (Limit::OneSided(Side::Interior), None),
        LimitMode::Exterior => (Limit::OneSided(Side::Exterior), None),
        LimitMode::TwoSidedAverage => (Limit::TwoSided, None),
        LimitMode::JumpSubtractedInterior => (Limit::OneSided(Side::Interior), Some(Side::Interior)),
        LimitMode::JumpSubtractedExterior => (Limit::OneSided(Side::Exterior), Some(Side::Exterior)),
    }
}

#[derive(Default)]
struct RowWork {
    derivs: Vec<TargetDerivative>,
    factors: Vec<SourceFactor>,
    e: Vec<Complex64>,
    comb: Vec<Complex64>,
    f: Vec<Complex64>,
    scratch: FactorScratch,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curve;

    #[test]
    fn shared_assembly_matches_single_operators() {
        let disc = crate::solve::uniform_panels(&Curve::ellipse(2.0), 4, 16).unwrap();
        let layout = QbxLayout::new(disc, QbxOptions::default()).unwrap();
        let kernel = Kernel::helmholtz(1.5).unwrap();
        let requests = [
            (Variant::S, Limit::TwoSided),
            (Variant::D, Limit::OneSided(Side::Interior)),
            (Variant::Dp, Limit::OneSided(Side::Exterior)),
            (Variant::Sp, Limit::TwoSided),
        ];
        let many = layout.assemble_many(kernel, &requests, 6).unwrap();
        for (&(v, limit), m) in requests.iter().zip(&many) {
            let single = layout.assemble(&Combination::single(kernel, v), limit, 6).unwrap();
            let scale = single.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = (m - &single).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-13 * scale, "{v:?}: {diff:e}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn apply_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, m in 1u32..5, v in 0usize..12) {
            let disc = crate::solve::uniform_panels(&Curve::ellipse(2.0), 6, 16).unwrap();
            let layout = QbxLayout::new(disc.clone(), QbxOptions::default()).unwrap();
            let comb = Combination::single(Kernel::helmholtz(0.5).unwrap(), Variant::ALL[v]);
            let f: Vec<Complex64> = disc.t.iter().map(|&t| Complex64::new((2.0 * std::f64::consts::PI * m as f64 * t).sin(), 0.0)).collect();
            let g: Vec<Complex64> = disc.t.iter().map(|&t| Complex64::new(0.0, t.cos())).collect();
            let mix: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let lim = Limit::OneSided(Side::Interior);
            let (uf, ug, um) = (
                layout.apply(&comb, lim, &f, 8).unwrap(),
                layout.apply(&comb, lim, &g, 8).unwrap(),
                layout.apply(&comb, lim, &mix, 8).unwrap(),
            );
            let scale = uf.iter().chain(&ug).map(|z| z.norm()).fold(1.0, f64::max);
            for j in 0..disc.len() {
                proptest::prop_assert!((um[j] - (a * uf[j] + b * ug[j])).norm() <= 1e-12 * scale);
            }
        }
    }
}
