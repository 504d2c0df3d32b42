//! Oversampled source grids with a density resampling map from the target
//! grid.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::discretization::{trig_interp_matrix, Discretization, GridKind, Panel};
use crate::error::{QbxError, Result};
use crate::specfun::{gauss_legendre, legendre_interp_matrix};

#[derive(Debug, Clone)]
enum Resample {
    /// One interpolation block per source panel, from the parent target
    /// panel's nodes.
    Blocks {
        parent: Vec<usize>,
        mats: Vec<DMatrix<f64>>,
    },
    Dense(DMatrix<f64>),
}

/// Source quadrature grid derived from a target discretization: target
/// panels possibly bisected further, each carrying `factor` times the
/// target node count.
#[derive(Debug, Clone)]
pub struct SourceGrid {
    pub disc: Discretization,
    factor: usize,
    target_len: usize,
    target_nodes_per_panel: usize,
    resample: Resample,
    /// Source panel containing each target node.
    owner: Vec<usize>,
    rounds: usize,
}

impl SourceGrid {
    pub fn new(target: &Discretization, factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(QbxError::InvalidArgument("oversampling factor must be >= 1".into()));
        }
        match target.kind() {
            GridKind::Panels => {
                let parent: Vec<usize> = (0..target.num_panels()).collect();
                Self::from_subpanels(target, target.panels().to_vec(), parent, factor, 0)
            }
            GridKind::Trapezoidal => {
                let disc = Discretization::build_trapezoidal(target.curve(), target.len() * factor)?;
                let m = trig_interp_matrix(target.len(), &disc.t, target.curve().period());
                let owner = (0..target.len()).map(|j| j * factor).collect();
                Ok(SourceGrid {
                    disc,
                    factor,
                    target_len: target.len(),
                    target_nodes_per_panel: target.len(),
                    resample: Resample::Dense(m),
                    owner,
                    rounds: 0,
                })
            }
        }
    }

    fn from_subpanels(
        target: &Discretization,
        panels: Vec<Panel>,
        parent: Vec<usize>,
        factor: usize,
        rounds: usize,
    ) -> Result<Self> {
        let q = target.nodes_per_panel();
        let big_q = q * factor;
        let disc = Discretization::from_panels(target.curve(), panels, big_q)?;
        let from = gauss_legendre(q).nodes.clone();
        let to = gauss_legendre(big_q).nodes.clone();
        let mut mats = Vec::with_capacity(disc.num_panels());
        for (sp, p) in disc.panels().iter().enumerate() {
            let tp = &target.panels()[parent[sp]];
            let mapped: Vec<f64> = to
                .iter()
                .map(|&u| tp.local_coordinate(p.param_at(u)))
                .collect();
            mats.push(legendre_interp_matrix(&from, &mapped));
        }
        let owner = (0..target.len())
            .map(|j| {
                let tp = target.panel_of[j];
                let t = target.t[j];
                (0..disc.num_panels())
                    .find(|&sp| parent[sp] == tp && disc.panels()[sp].ta <= t && t <= disc.panels()[sp].tb)
                    .expect("every target node lies in a source panel")
            })
            .collect();
        Ok(SourceGrid {
            disc,
            factor,
            target_len: target.len(),
            target_nodes_per_panel: q,
            resample: Resample::Blocks { parent, mats },
            owner,
            rounds,
        })
    }

    /// Bisects the marked source panels.
    pub fn bisect(&self, target: &Discretization, marked: &[bool]) -> Result<Self> {
        let parent = match &self.resample {
            Resample::Blocks { parent, .. } => parent,
            Resample::Dense(_) => {
                return Err(QbxError::InvalidArgument(
                    "a trapezoidal source grid cannot be bisected".into(),
                ))
            }
        };
        let order = self.disc.panel_order();
        let mut panels = Vec::new();
        let mut new_parent = Vec::new();
        for (sp, p) in self.disc.panels().iter().enumerate() {
            if marked[sp] {
                let m = 0.5 * (p.ta + p.tb);
                panels.push(Panel::from_curve(target.curve(), p.ta, m, order));
                panels.push(Panel::from_curve(target.curve(), m, p.tb, order));
                new_parent.extend([parent[sp], parent[sp]]);
            } else {
                panels.push(p.clone());
                new_parent.push(parent[sp]);
            }
        }
        Self::from_subpanels(target, panels, new_parent, self.factor, self.rounds + 1)
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Number of bisection rounds applied since construction.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn len(&self) -> usize {
        self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disc.is_empty()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// Source panel (or, for trapezoidal grids, source node) owning target
    /// node `j`.
    pub fn owner(&self, j: usize) -> usize {
        self.owner[j]
    }

    pub fn is_trapezoidal(&self) -> bool {
        matches!(self.resample, Resample::Dense(_))
    }

    /// Whether source panels `a` and `b` coincide or share an endpoint.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return true;
        }
        let (prev, next) = self.disc.neighbors(a);
        b == prev || b == next
    }

    /// Interpolates target-grid samples onto the source nodes.
    pub fn resample(&self, density: &[Complex64]) -> Result<Vec<Complex64>> {
        if density.len() != self.target_len {
            return Err(QbxError::DimensionMismatch {
                expected: self.target_len,
                got: density.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        match &self.resample {
            Resample::Blocks { parent, mats } => {
                let q = self.target_nodes_per_panel;
                for (sp, m) in mats.iter().enumerate() {
                    let src = &density[parent[sp] * q..(parent[sp] + 1) * q];
                    for (i, o) in out[self.disc.node_range(sp)].iter_mut().enumerate() {
                        *o = src.iter().enumerate().map(|(j, &v)| v * m[(i, j)]).sum();
                    }
                }
            }
            Resample::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = density.iter().enumerate().map(|(j, &v)| v * m[(i, j)]).sum();
                }
            }
        }
        Ok(out)
    }

    /// Transposed resampling: maps a row over source nodes to the equivalent
    /// row over target nodes, so that `row . resample(s) == pulled . s`.
    pub fn pull_back_row(&self, row: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        match &self.resample {
            Resample::Blocks { parent, mats } => {
                let q = self.target_nodes_per_panel;
                for (sp, m) in mats.iter().enumerate() {
                    let r = self.disc.node_range(sp);
                    let dst = &mut out[parent[sp] * q..(parent[sp] + 1) * q];
                    for (i, &rv) in row[r].iter().enumerate() {
                        if rv == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (j, d) in dst.iter_mut().enumerate() {
                            *d += rv * m[(i, j)];
                        }
                    }
                }
            }
            Resample::Dense(m) => {
                for (i, &rv) in row.iter().enumerate() {
                    for (j, d) in out.iter_mut().enumerate() {
                        *d += rv * m[(i, j)];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, PanelOptions};

    #[test]
    fn resample_and_pull_back_agree() {
        let c = Curve::ellipse(3.0);
        let t = Discretization::build_panelization(&c, PanelOptions::for_curve(&c)).unwrap();
        let g = SourceGrid::new(&t, 6).unwrap();
        let mut marked = vec![false; g.disc.num_panels()];
        marked[3] = true;
        marked[17] = true;
        let g = g.bisect(&t, &marked).unwrap();
        assert_eq!(g.disc.num_panels(), t.num_panels() + 2);
        assert_eq!(g.rounds(), 1);
        let dens: Vec<Complex64> = t
            .t
            .iter()
            .map(|&s| Complex64::new((2.0 * std::f64::consts::PI * s).cos(), s))
            .collect();
        let fine = g.resample(&dens).unwrap();
        for (j, v) in fine.iter().enumerate() {
            let s = g.disc.t[j];
            let exact = Complex64::new((2.0 * std::f64::consts::PI * s).cos(), s);
            assert!((v - exact).norm() < 1e-12);
        }
        let row: Vec<Complex64> = (0..g.len()).map(|i| Complex64::new((i as f64).sin(), 1.0)).collect();
        let mut pulled = vec![Complex64::new(0.0, 0.0); t.len()];
        g.pull_back_row(&row, &mut pulled);
        let a: Complex64 = row.iter().zip(&fine).map(|(r, f)| r * f).sum();
        let b: Complex64 = pulled.iter().zip(&dens).map(|(r, f)| r * f).sum();
        assert!((a - b).norm() < 1e-10 * a.norm());
        for j in 0..t.len() {
            let sp = g.owner(j);
            let p = &g.disc.panels()[sp];
            assert!(p.ta <= t.t[j] && t.t[j] <= p.tb);
        }
    }
}
