//! Convergence studies over panel-refinement ladders.

use std::io::Write;

use super::bvp::{solve_bvp_with, standard_charges, standard_observation_points, BvpProblem, Condition, OperatorBlocks, SolveOptions};
use crate::error::{QbxError, Result};
use crate::geometry::{Curve, Discretization, Panel};
use crate::kernels::Side;
use crate::potential::Potential;
use crate::qbx::QbxOptions;

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Empirical order of convergence: the slope of `log(error)` against
/// `log(h)`.
pub fn empirical_order(h_and_error: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = h_and_error.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    fit_slope(&pts)
}

/// Equispaced-in-`t` panels of `order` Gauss nodes.
pub fn uniform_panels(curve: &Curve, panels: usize, order: usize) -> Result<Discretization> {
    if panels == 0 || order == 0 {
        return Err(QbxError::InvalidArgument("need at least one panel and one node".into()));
    }
    let dt = curve.period() / panels as f64;
    let list = (0..panels)
        .map(|i| Panel::from_curve(curve, i as f64 * dt, (i + 1) as f64 * dt, order))
        .collect();
    Discretization::from_panels(curve, list, order)
}

/// A family of manufactured-solution problems indexed by resolution.
#[derive(Debug, Clone)]
pub struct ProblemFamily {
    pub curve: Curve,
    pub condition: Condition,
    pub side: Side,
    pub k: f64,
    pub panel_order: usize,
    /// Dyadic refinement toward each declared corner down to this panel
    /// length.
    pub corner_min_len: Option<f64>,
}

impl ProblemFamily {
    pub fn new(curve: Curve, condition: Condition, side: Side, k: f64) -> Self {
        ProblemFamily {
            corner_min_len: if curve.corners().is_empty() { None } else { Some(1e-8) },
            curve,
            condition,
            side,
            k,
            panel_order: 16,
        }
    }

    /// Discretization with `panels` equispaced base panels.
    pub fn discretization(&self, panels: usize) -> Result<Discretization> {
        let mut d = uniform_panels(&self.curve, panels, self.panel_order)?;
        if let Some(min_len) = self.corner_min_len {
            for &c in self.curve.corners() {
                d = d.dyadic_refine_corner(c, min_len)?;
            }
        }
        Ok(d)
    }

    pub fn problem(&self, panels: usize) -> Result<BvpProblem> {
        self.problem_on(self.discretization(panels)?)
    }

    /// The manufactured problem on a given discretization of the curve.
    pub fn problem_on(&self, disc: Discretization) -> Result<BvpProblem> {
        BvpProblem::manufactured(
            disc,
            self.condition,
            self.side,
            self.k,
            standard_charges(&self.curve, self.side),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub base_panels: usize,
    pub panels: usize,
    pub nodes: usize,
    /// Base panel arc length (curve length over base panel count).
    pub h: f64,
    pub l2_error: f64,
    pub linf_error: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub condition: Condition,
    pub side: Side,
    pub p: usize,
    pub rows: Vec<StudyRow>,
    /// Fitted order of the l2 errors.
    pub eoc: f64,
}

impl StudyTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "condition,side,p,base_panels,panels,N,h,l2_error,linf_error,iterations,residual,converged,eoc")?;
        self.write_rows(&mut out)
    }

    /// Rows without the header line.
    pub fn write_rows<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let side = match self.side {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        };
        for r in &self.rows {
            writeln!(
                out,
                "{},{side},{},{},{},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{:.16e}",
                self.condition.name(),
                self.p, r.base_panels, r.panels, r.nodes, r.h, r.l2_error, r.linf_error, r.iterations, r.residual, r.converged, self.eoc
            )?;
        }
        Ok(())
    }
}

/// Solves the family at each ladder level and fits the order of the
/// observation errors.
pub fn convergence_study(family: &ProblemFamily, opts: &SolveOptions, ladder: &[usize]) -> Result<StudyTable> {
    let mut tables = convergence_suite(family, &[(family.condition, family.side)], opts, &[opts.order()], ladder)?;
    Ok(tables.pop().expect("one case at one order"))
}

/// Convergence studies of several conditions and sides at several orders,
/// on the curve and discretization settings of `base`. The operator
/// matrices of each ladder level and order are assembled once and shared by
/// all cases. Tables are ordered by case, then by order.
pub fn convergence_suite(
    base: &ProblemFamily,
    cases: &[(Condition, Side)],
    opts: &SolveOptions,
    orders: &[usize],
    ladder: &[usize],
) -> Result<Vec<StudyTable>> {
    if ladder.len() < 3 {
        return Err(QbxError::InvalidArgument(format!(
            "a convergence study needs at least 3 levels, got {}",
            ladder.len()
        )));
    }
    if cases.is_empty() || orders.is_empty() {
        return Err(QbxError::InvalidArgument("a convergence suite needs a case and an order".into()));
    }
    let families: Vec<ProblemFamily> = cases
        .iter()
        .map(|&(condition, side)| ProblemFamily {
            condition,
            side,
            ..base.clone()
        })
        .collect();
    let observations: Vec<_> = cases.iter().map(|&(_, side)| standard_observation_points(&base.curve, side)).collect();
    let conditions: Vec<Condition> = cases.iter().map(|c| c.0).collect();
    let sides: Vec<Side> = cases.iter().map(|c| c.1).collect();
    let mut rows: Vec<Vec<StudyRow>> = vec![Vec::with_capacity(ladder.len()); cases.len() * orders.len()];
    let mut length = None;
    for &m in ladder {
        let disc = families[0].discretization(m)?;
        let total = *length.get_or_insert_with(|| disc.arc_length());
        for (oi, &p) in orders.iter().enumerate() {
            let opts_p = SolveOptions {
                qbx: QbxOptions { order: p, ..opts.qbx },
                ..*opts
            };
            let potential = Potential::new(disc.clone(), opts_p.qbx)?;
            let blocks = OperatorBlocks::assemble(&potential, base.k, &opts_p, &conditions, &sides)?;
            for (ci, family) in families.iter().enumerate() {
                let problem = family.problem_on(disc.clone())?;
                let report = solve_bvp_with(&problem, &potential, &blocks, &opts_p, &observations[ci])?;
                log::info!(
                    "{} {:?} p={p} panels={m}: l2 {:.3e}, {} iterations",
                    family.condition.name(),
                    family.side,
                    report.l2_relative_error,
                    report.iterations
                );
                rows[ci * orders.len() + oi].push(StudyRow {
                    base_panels: m,
                    panels: disc.num_panels(),
                    nodes: disc.len(),
                    h: total / m as f64,
                    l2_error: report.l2_relative_error,
                    linf_error: report.linf_relative_error,
                    iterations: report.iterations,
                    residual: report.residual,
                    converged: report.converged,
                });
            }
        }
    }
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, rows)| {
            let (condition, side) = cases[i / orders.len()];
            let eoc = empirical_order(&rows.iter().map(|r| (r.h, r.l2_error)).collect::<Vec<_>>());
            StudyTable {
                condition,
                side,
                p: orders[i % orders.len()],
                rows,
                eoc,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_gives_its_order() {
        let data: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h: &f64| (h, 3.0 * h.powi(4))).collect();
        assert!((empirical_order(&data) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn short_ladder_rejected() {
        let f = ProblemFamily::new(Curve::circle(1.0), Condition::Dirichlet, Side::Interior, 0.5);
        assert!(convergence_study(&f, &SolveOptions::with_order(3), &[4, 8]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn fitted_order_of_a_power_law(order in 0.5f64..12.0, scale in 1e-6f64..1e3, h0 in 0.01f64..1.0) {
            let data: Vec<(f64, f64)> = (0..5).map(|i| {
                let h = h0 / 1.5f64.powi(i);
                (h, scale * h.powf(order))
            }).collect();
            proptest::prop_assert!((empirical_order(&data) - order).abs() < 1e-9);
        }
    }
}
