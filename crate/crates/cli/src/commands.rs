//! The four subcommands. Each computes its outputs in memory; the caller
//! writes them only after everything succeeded.

use std::fmt::{self, Write as _};

use anyhow::{Context, Result};
use num_complex::Complex64;
use qbx::kernels::{Kernel, LimitMode, OperatorSpec, Side, Variant};
use qbx::oracle::{Oracle, OracleOptions};
use qbx::potential::{error_field_map, FieldMethod, Potential, Reference, TargetSet};
use qbx::solve::{convergence_suite, ProblemFamily};
use qbx::Vec2;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{parse_sides, Config, ConfigError};

/// A failure of the numerics rather than of the configuration.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical failure: {}", self.0)
    }
}

impl std::error::Error for NumericalFailure {}

/// A named output file and its contents.
pub struct Output {
    pub path: String,
    pub contents: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// The reference limit matching a limit mode: one-sided modes compare with
/// one-sided limits, the others with principal values.
fn oracle_values(oracle: &Oracle<'_>, variants: &[Variant], j: usize, mode: LimitMode) -> qbx::Result<Vec<Complex64>> {
    match mode {
        LimitMode::Interior => oracle.one_sided(variants, j, Side::Interior),
        LimitMode::Exterior => oracle.one_sided(variants, j, Side::Exterior),
        _ => oracle.pv_reference(variants, j),
    }
}

/// Layer-potential values at every node, or at the configured off-surface
/// points.
pub fn evaluate(cfg: &Config, oracle: bool) -> Result<Vec<Output>> {
    let curve = cfg.curve()?;
    let kernel = cfg.kernel()?;
    let mode = cfg.limit_mode()?;
    let spec = OperatorSpec::new(kernel, cfg.variant()?, mode)?;
    let density_fn = cfg.density()?;
    let disc = cfg.discretization(&curve)?;
    let density = density_fn.sample(&disc);
    let potential = Potential::new(disc.clone(), cfg.qbx_options(cfg.qbx.p)?)?;
    let (label, points, targets) = match &cfg.evaluate.points {
        Some(pts) => {
            let pts: Vec<Vec2> = pts.iter().map(|&[x, y]| Vec2::new(x, y)).collect();
            ("index", pts.clone(), TargetSet::off_surface(pts))
        }
        None => (
            "node",
            disc.points.clone(),
            TargetSet::on_surface(&disc, (0..disc.len()).collect())?,
        ),
    };
    let values = potential.apply(&spec, &density, &targets, cfg.qbx.p)?;
    let reference = if oracle {
        if cfg.evaluate.points.is_none() && cfg.discretization.kind == "trapezoidal" {
            return Err(ConfigError("discretization.kind: on-surface oracle values need a panel discretization".into()).into());
        }
        let o = Oracle::new(kernel, &disc, &density, OracleOptions::default())?;
        let refs: Vec<Complex64> = if cfg.evaluate.points.is_some() {
            points
                .par_iter()
                .map(|&x| Ok(o.adaptive_eval(&[spec.variant], x, Vec2::ZERO)?[0]))
                .collect::<qbx::Result<_>>()?
        } else {
            (0..disc.len())
                .into_par_iter()
                .map(|j| Ok(oracle_values(&o, &[spec.variant], j, mode)?[0]))
                .collect::<qbx::Result<_>>()?
        };
        Some(refs)
    } else {
        None
    };
    let mut csv = format!("{label},x,y,re,im");
    if reference.is_some() {
        csv.push_str(",ref_re,ref_im,abs_error");
    }
    csv.push('\n');
    for (i, (x, v)) in points.iter().zip(&values).enumerate() {
        write!(csv, "{i},{},{},{},{}", num(x.x), num(x.y), num(v.re), num(v.im))?;
        if let Some(r) = &reference {
            write!(csv, ",{},{},{}", num(r[i].re), num(r[i].im), num((v - r[i]).norm()))?;
        }
        csv.push('\n');
    }
    Ok(vec![Output {
        path: cfg.output.values.clone(),
        contents: csv,
    }])
}

/// Error of a field evaluation over a grid of points, with a JSON sidecar.
pub fn errormap(cfg: &Config, oracle: bool) -> Result<Vec<Output>> {
    let curve = cfg.curve()?;
    let kernel = cfg.kernel()?;
    let spec = OperatorSpec::new(kernel, cfg.variant()?, LimitMode::TwoSidedAverage)?;
    let grid = cfg.grid()?;
    let density_fn = cfg.density()?;
    let disc = cfg.discretization(&curve)?;
    let density = density_fn.sample(&disc);
    let potential;
    let method = match cfg.errormap.method.as_str() {
        "qbx" => {
            potential = Potential::new(disc.clone(), cfg.qbx_options(cfg.qbx.p)?)?;
            FieldMethod::Routed {
                potential: &potential,
                density: &density,
                p: cfg.qbx.p,
            }
        }
        _ => FieldMethod::Direct {
            disc: &disc,
            density: &density,
        },
    };
    let map = if cfg.errormap.reference == "self" {
        let own = method.evaluate(&spec, &grid.points())?;
        error_field_map(&spec, &method, &grid, &Reference::Values(&own), &curve, cfg.errormap.skip_distance)?
    } else {
        if !oracle {
            return Err(ConfigError("errormap.reference: the oracle reference needs --oracle on".into()).into());
        }
        let odisc = cfg.oracle_discretization(&curve)?;
        let odensity = density_fn.sample(&odisc);
        let o = Oracle::new(kernel, &odisc, &odensity, OracleOptions::default())?;
        error_field_map(&spec, &method, &grid, &Reference::Oracle(&o), &curve, cfg.errormap.skip_distance)?
    };
    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    let parameters = json!({
        "geometry": cfg.geometry.name,
        "kernel": cfg.kernel,
        "operator": spec.variant.name(),
        "density": cfg.operator.density,
        "discretization": cfg.discretization.kind,
        "nodes": disc.len(),
        "method": cfg.errormap.method,
        "reference": cfg.errormap.reference,
        "p": cfg.qbx.p,
    });
    let sidecar = serde_json::to_string_pretty(&map.sidecar_json(&parameters))? + "\n";
    Ok(vec![
        Output {
            path: cfg.output.errormap.clone(),
            contents: String::from_utf8(csv).context("error map CSV is UTF-8")?,
        },
        Output {
            path: cfg.output.errormap_sidecar.clone(),
            contents: sidecar,
        },
    ])
}

/// On-surface accuracy of each configured operator against the oracle.
pub fn operator_table(cfg: &Config, oracle: bool) -> Result<Vec<Output>> {
    if !oracle {
        return Err(ConfigError("--oracle: operator-table compares against the oracle and needs it on".into()).into());
    }
    if cfg.discretization.kind == "trapezoidal" {
        return Err(ConfigError("discretization.kind: operator-table needs a panel discretization".into()).into());
    }
    let curve = cfg.curve()?;
    let kernel = cfg.kernel()?;
    let mode = cfg.limit_mode()?;
    let variants = cfg.variants()?;
    let specs: Vec<OperatorSpec> = variants
        .iter()
        .map(|&v| OperatorSpec::new(kernel, v, mode))
        .collect::<qbx::Result<_>>()?;
    let disc = cfg.discretization(&curve)?;
    let density = cfg.density()?.sample(&disc);
    let nodes: Vec<usize> = (0..disc.len()).step_by(cfg.operator.node_stride).collect();
    let potential = Potential::new(disc.clone(), cfg.qbx_options(cfg.qbx.p)?)?;
    let targets = TargetSet::on_surface(&disc, nodes.clone())?;
    let computed: Vec<Vec<Complex64>> = specs
        .iter()
        .map(|s| potential.apply(s, &density, &targets, cfg.qbx.p))
        .collect::<qbx::Result<_>>()?;
    let o = Oracle::new(kernel, &disc, &density, OracleOptions::default())?;
    let reference: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&j| oracle_values(&o, &variants, j, mode))
        .collect::<qbx::Result<_>>()?;
    let mut csv = String::from("operator,l2_error,linf_error\n");
    for (vi, v) in variants.iter().enumerate() {
        let mut l2 = 0.0;
        let mut linf: f64 = 0.0;
        for (ni, &j) in nodes.iter().enumerate() {
            let e = (computed[vi][ni] - reference[ni][vi]).norm();
            l2 += disc.weights[j] * e * e;
            linf = linf.max(e);
        }
        writeln!(csv, "{},{},{}", v.name(), num(l2.sqrt()), num(linf))?;
    }
    Ok(vec![Output {
        path: cfg.output.operator_table.clone(),
        contents: csv,
    }])
}

/// Manufactured-solution convergence tables over the configured ladder.
pub fn convergence(cfg: &Config) -> Result<Vec<Output>> {
    let curve = cfg.curve()?;
    let k = match cfg.kernel()? {
        Kernel::Helmholtz { k } => k,
        Kernel::Laplace => {
            return Err(ConfigError("kernel.type: boundary value problems are posed for the Helmholtz kernel".into()).into())
        }
    };
    let condition = cfg.condition()?;
    let sides = parse_sides(&cfg.qbx.side)?;
    let cases: Vec<_> = sides.iter().map(|&s| (condition, s)).collect();
    let base = ProblemFamily {
        panel_order: cfg.discretization.panel_order,
        corner_min_len: if curve.corners().is_empty() {
            None
        } else {
            Some(cfg.discretization.corner_min_len)
        },
        ..ProblemFamily::new(curve, condition, sides[0], k)
    };
    let opts = cfg.solve_options(cfg.qbx.p)?;
    let tables = convergence_suite(&base, &cases, &opts, &cfg.study.p_list, &cfg.study.ladder)?;
    if let Some((t, r)) = tables.iter().find_map(|t| t.rows.iter().find(|r| !r.converged).map(|r| (t, r))) {
        return Err(NumericalFailure(format!(
            "GMRES stopped at residual {:.3e} after {} iterations (p = {}, {} base panels)",
            r.residual, r.iterations, t.p, r.base_panels
        ))
        .into());
    }
    let mut csv = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        if i == 0 {
            t.write_csv(&mut csv)?;
        } else {
            t.write_rows(&mut csv)?;
        }
    }
    Ok(vec![Output {
        path: cfg.output.convergence.clone(),
        contents: String::from_utf8(csv).context("convergence CSV is UTF-8")?,
    }])
}
