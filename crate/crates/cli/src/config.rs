//! The JSON run configuration shared by all commands.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use qbx::geometry::{Curve, Discretization, PanelOptions};
use qbx::kernels::{Kernel, LimitMode, Side, Variant};
use qbx::potential::GridSpec;
use qbx::qbx::{CenterOptions, QbxOptions};
use qbx::solve::{uniform_panels, Condition, DoubleLayerLimit, GmresOptions, SolveOptions};
use serde::{Deserialize, Serialize};

/// A configuration problem, reported with the path of the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(path: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometryConfig,
    pub kernel: KernelConfig,
    pub discretization: DiscretizationConfig,
    pub qbx: QbxConfig,
    pub operator: OperatorConfig,
    pub solver: SolverConfig,
    pub study: StudyConfig,
    pub evaluate: EvaluateConfig,
    pub errormap: ErrorMapConfig,
    pub output: OutputConfig,
    /// Recorded for reproducibility; every computation is deterministic.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// One of `circle`, `ellipse`, `starfish`, `teardrop`, `bean`.
    pub name: String,
    pub params: GeometryParams,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            name: "starfish".into(),
            params: GeometryParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryParams {
    /// Circle radius.
    pub radius: f64,
    /// Ellipse aspect ratio.
    pub alpha: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams { radius: 1.0, alpha: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// `helmholtz` or `laplace`.
    #[serde(rename = "type")]
    pub kind: String,
    pub k: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kind: "helmholtz".into(),
            k: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// `panels` (resolution-driven), `uniform` (equispaced panels) or
    /// `trapezoidal`.
    pub kind: String,
    pub panel_order: usize,
    pub resolve_tol: f64,
    /// Seed panel count for `panels`; the curve's customary count if absent.
    pub initial_panels: Option<usize>,
    /// Panel count for `uniform`.
    pub panels: usize,
    /// Node count for `trapezoidal`.
    pub nodes: usize,
    /// Dyadic refinement toward corners down to this panel length.
    pub corner_min_len: f64,
    pub oversampling: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            kind: "panels".into(),
            panel_order: 16,
            resolve_tol: 1e-11,
            initial_panels: None,
            panels: 32,
            nodes: 80,
            corner_min_len: 1e-8,
            oversampling: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QbxConfig {
    pub p: usize,
    /// `interior`, `exterior` or `both`.
    pub side: String,
    pub limit_mode: String,
    /// `half_panel`, or `fraction:<x>` for `r = x h`.
    pub radius_rule: String,
}

impl Default for QbxConfig {
    fn default() -> Self {
        QbxConfig {
            p: 16,
            side: "interior".into(),
            limit_mode: LimitMode::TwoSidedAverage.name().into(),
            radius_rule: "half_panel".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    /// Operator applied by `evaluate` and `errormap`.
    pub variant: String,
    /// Operators tabulated by `operator-table`.
    pub variants: Vec<String>,
    /// Named density: `zero`, `one`, `sin10pit`, `sin:m`, `cos:m` or
    /// `fourier:m`, as functions of the normalized parameter `t`.
    pub density: String,
    /// `operator-table` compares every `node_stride`-th node.
    pub node_stride: usize,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            variant: "S".into(),
            variants: Variant::ALL.iter().map(|v| v.name().to_string()).collect(),
            density: "sin10pit".into(),
            node_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// `dirichlet` or `neumann`.
    pub condition: String,
    pub sqrt_weights: bool,
    /// `two_sided` or `one_sided`.
    pub d_limit: String,
    pub dp_limit: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-14,
            max_iter: 100,
            condition: "dirichlet".into(),
            sqrt_weights: true,
            d_limit: "two_sided".into(),
            dp_limit: "one_sided".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub p_list: Vec<usize>,
    /// Base panel counts.
    pub ladder: Vec<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            p_list: vec![3, 5, 7],
            ladder: vec![8, 12, 16, 24],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Off-surface targets; every node of the discretization if absent.
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            x_min: -1.5,
            x_max: 1.5,
            y_min: -1.5,
            y_max: 1.5,
            nx: 64,
            ny: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorMapConfig {
    pub grid: GridConfig,
    /// `direct` (the discretization's own rule) or `qbx`.
    pub method: String,
    /// `oracle` or `self`.
    pub reference: String,
    pub skip_distance: f64,
}

impl Default for ErrorMapConfig {
    fn default() -> Self {
        ErrorMapConfig {
            grid: GridConfig::default(),
            method: "direct".into(),
            reference: "oracle".into(),
            skip_distance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub values: String,
    pub errormap: String,
    pub errormap_sidecar: String,
    pub operator_table: String,
    pub convergence: String,
    pub effective_config: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            values: "values.csv".into(),
            errormap: "errormap.csv".into(),
            errormap_sidecar: "errormap.json".into(),
            operator_table: "operator_table.csv".into(),
            convergence: "convergence.csv".into(),
            effective_config: "effective_config.json".into(),
        }
    }
}

/// A density given as a named function of the normalized parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedDensity {
    Zero,
    One,
    Sin(u32),
    Cos(u32),
    Fourier(i32),
}

impl FromStr for NamedDensity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mode = |m: &str| m.trim().parse::<i64>().map_err(|_| format!("bad mode number in '{s}'"));
        match s {
            "zero" => Ok(NamedDensity::Zero),
            "one" => Ok(NamedDensity::One),
            "sin10pit" => Ok(NamedDensity::Sin(5)),
            _ => {
                if let Some(m) = s.strip_prefix("sin:") {
                    Ok(NamedDensity::Sin(u32::try_from(mode(m)?).map_err(|e| e.to_string())?))
                } else if let Some(m) = s.strip_prefix("cos:") {
                    Ok(NamedDensity::Cos(u32::try_from(mode(m)?).map_err(|e| e.to_string())?))
                } else if let Some(m) = s.strip_prefix("fourier:") {
                    Ok(NamedDensity::Fourier(i32::try_from(mode(m)?).map_err(|e| e.to_string())?))
                } else {
                    Err(format!(
                        "unknown density '{s}'; expected zero, one, sin10pit, sin:m, cos:m or fourier:m"
                    ))
                }
            }
        }
    }
}

impl NamedDensity {
    /// Value at normalized parameter `s` in `[0, 1)`; `sin:m` is
    /// `sin(2 pi m s)`.
    pub fn at(self, s: f64) -> Complex64 {
        let w = 2.0 * PI * s;
        match self {
            NamedDensity::Zero => Complex64::new(0.0, 0.0),
            NamedDensity::One => Complex64::new(1.0, 0.0),
            NamedDensity::Sin(m) => Complex64::new((m as f64 * w).sin(), 0.0),
            NamedDensity::Cos(m) => Complex64::new((m as f64 * w).cos(), 0.0),
            NamedDensity::Fourier(m) => Complex64::from_polar(1.0, m as f64 * w),
        }
    }

    /// Samples at the nodes of `disc`.
    pub fn sample(self, disc: &Discretization) -> Vec<Complex64> {
        let period = disc.curve().period();
        disc.t.iter().map(|&t| self.at(t / period)).collect()
    }
}

/// Which sides a command covers.
pub fn parse_sides(s: &str) -> Result<Vec<Side>, ConfigError> {
    match s {
        "interior" => Ok(vec![Side::Interior]),
        "exterior" => Ok(vec![Side::Exterior]),
        "both" => Ok(vec![Side::Interior, Side::Exterior]),
        _ => Err(bad("qbx.side", format!("expected interior, exterior or both, got '{s}'"))),
    }
}

fn parse_layer_limit(path: &str, s: &str) -> Result<DoubleLayerLimit, ConfigError> {
    match s {
        "two_sided" => Ok(DoubleLayerLimit::TwoSided),
        "one_sided" => Ok(DoubleLayerLimit::OneSided),
        _ => Err(bad(path, format!("expected two_sided or one_sided, got '{s}'"))),
    }
}

impl Config {
    /// Parses a JSON document, reporting the path of any malformed field.
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." || path == "?" { "config".to_string() } else { path };
            ConfigError(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field that all commands rely on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.curve()?;
        self.kernel()?;
        self.variant()?;
        self.variants()?;
        self.density()?;
        self.limit_mode()?;
        parse_sides(&self.qbx.side)?;
        self.radius_factor()?;
        self.condition()?;
        parse_layer_limit("solver.d_limit", &self.solver.d_limit)?;
        parse_layer_limit("solver.dp_limit", &self.solver.dp_limit)?;
        let d = &self.discretization;
        if !["panels", "uniform", "trapezoidal"].contains(&d.kind.as_str()) {
            return Err(bad(
                "discretization.kind",
                format!("expected panels, uniform or trapezoidal, got '{}'", d.kind),
            ));
        }
        if d.panel_order < 4 {
            return Err(bad("discretization.panel_order", "must be at least 4"));
        }
        if !(d.resolve_tol > 0.0) {
            return Err(bad("discretization.resolve_tol", "must be positive"));
        }
        if d.initial_panels == Some(0) {
            return Err(bad("discretization.initial_panels", "must be positive"));
        }
        if d.panels == 0 {
            return Err(bad("discretization.panels", "must be positive"));
        }
        if d.nodes < 3 {
            return Err(bad("discretization.nodes", "must be at least 3"));
        }
        if !(d.corner_min_len > 0.0) {
            return Err(bad("discretization.corner_min_len", "must be positive"));
        }
        if d.oversampling == 0 {
            return Err(bad("discretization.oversampling", "must be positive"));
        }
        if self.qbx.p == 0 {
            return Err(bad("qbx.p", "must be positive"));
        }
        if self.operator.node_stride == 0 {
            return Err(bad("operator.node_stride", "must be positive"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(bad("solver.tol", "must be positive"));
        }
        if self.solver.max_iter == 0 {
            return Err(bad("solver.max_iter", "must be positive"));
        }
        if self.study.ladder.len() < 3 {
            return Err(bad(
                "study.ladder",
                format!("a convergence study needs at least 3 levels, got {}", self.study.ladder.len()),
            ));
        }
        if self.study.ladder.contains(&0) {
            return Err(bad("study.ladder", "panel counts must be positive"));
        }
        if self.study.p_list.is_empty() || self.study.p_list.contains(&0) {
            return Err(bad("study.p_list", "needs at least one positive order"));
        }
        self.grid()?;
        if !["direct", "qbx"].contains(&self.errormap.method.as_str()) {
            return Err(bad(
                "errormap.method",
                format!("expected direct or qbx, got '{}'", self.errormap.method),
            ));
        }
        if !["oracle", "self"].contains(&self.errormap.reference.as_str()) {
            return Err(bad(
                "errormap.reference",
                format!("expected oracle or self, got '{}'", self.errormap.reference),
            ));
        }
        if !(self.errormap.skip_distance >= 0.0) {
            return Err(bad("errormap.skip_distance", "must be non-negative"));
        }
        if let Some(points) = &self.evaluate.points {
            if points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(bad("evaluate.points", "coordinates must be finite"));
            }
        }
        Ok(())
    }

    pub fn curve(&self) -> Result<Curve, ConfigError> {
        let p = &self.geometry.params;
        match self.geometry.name.as_str() {
            "circle" if p.radius > 0.0 => Ok(Curve::circle(p.radius)),
            "circle" => Err(bad("geometry.params.radius", "must be positive")),
            "ellipse" if p.alpha > 0.0 => Ok(Curve::ellipse(p.alpha)),
            "ellipse" => Err(bad("geometry.params.alpha", "must be positive")),
            "starfish" => Ok(Curve::starfish()),
            "teardrop" => Ok(Curve::teardrop()),
            "bean" => Ok(Curve::bean()),
            other => Err(bad(
                "geometry.name",
                format!("unknown geometry '{other}'; expected circle, ellipse, starfish, teardrop or bean"),
            )),
        }
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        match self.kernel.kind.as_str() {
            "helmholtz" => Kernel::helmholtz(self.kernel.k).map_err(|e| bad("kernel.k", e)),
            "laplace" => Ok(Kernel::Laplace),
            other => Err(bad("kernel.type", format!("expected helmholtz or laplace, got '{other}'"))),
        }
    }

    pub fn variant(&self) -> Result<Variant, ConfigError> {
        self.operator.variant.parse().map_err(|e| bad("operator.variant", e))
    }

    pub fn variants(&self) -> Result<Vec<Variant>, ConfigError> {
        if self.operator.variants.is_empty() {
            return Err(bad("operator.variants", "needs at least one operator"));
        }
        self.operator
            .variants
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse().map_err(|e| bad(&format!("operator.variants[{i}]"), e)))
            .collect()
    }

    pub fn density(&self) -> Result<NamedDensity, ConfigError> {
        self.operator.density.parse().map_err(|e| bad("operator.density", e))
    }

    pub fn limit_mode(&self) -> Result<LimitMode, ConfigError> {
        self.qbx.limit_mode.parse().map_err(|e| bad("qbx.limit_mode", e))
    }

    pub fn condition(&self) -> Result<Condition, ConfigError> {
        match self.solver.condition.as_str() {
            "dirichlet" => Ok(Condition::Dirichlet),
            "neumann" => Ok(Condition::Neumann),
            other => Err(bad("solver.condition", format!("expected dirichlet or neumann, got '{other}'"))),
        }
    }

    fn radius_factor(&self) -> Result<f64, ConfigError> {
        let rule = self.qbx.radius_rule.as_str();
        let factor = match rule {
            "half_panel" => 0.5,
            _ => rule
                .strip_prefix("fraction:")
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| bad("qbx.radius_rule", format!("expected half_panel or fraction:<x>, got '{rule}'")))?,
        };
        if !(factor > 0.0 && factor < 1.0) {
            return Err(bad("qbx.radius_rule", "the radius fraction must lie in (0, 1)"));
        }
        Ok(factor)
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        let g = &self.errormap.grid;
        let spec = GridSpec {
            x_min: g.x_min,
            x_max: g.x_max,
            y_min: g.y_min,
            y_max: g.y_max,
            nx: g.nx,
            ny: g.ny,
        };
        spec.validate().map_err(|e| bad("errormap.grid", e))?;
        Ok(spec)
    }

    pub fn qbx_options(&self, p: usize) -> Result<QbxOptions, ConfigError> {
        Ok(QbxOptions {
            order: p,
            oversampling: self.discretization.oversampling,
            centers: CenterOptions {
                radius_factor: self.radius_factor()?,
                ..CenterOptions::default()
            },
        })
    }

    pub fn solve_options(&self, p: usize) -> Result<SolveOptions, ConfigError> {
        Ok(SolveOptions {
            qbx: self.qbx_options(p)?,
            gmres: GmresOptions {
                tol: self.solver.tol,
                max_iter: Some(self.solver.max_iter),
            },
            sqrt_weights: self.solver.sqrt_weights,
            d_limit: parse_layer_limit("solver.d_limit", &self.solver.d_limit)?,
            dp_limit: parse_layer_limit("solver.dp_limit", &self.solver.dp_limit)?,
        })
    }

    /// The discretization described by the `discretization` section.
    pub fn discretization(&self, curve: &Curve) -> qbx::Result<Discretization> {
        let d = &self.discretization;
        let mut disc = match d.kind.as_str() {
            "trapezoidal" => return Discretization::build_trapezoidal(curve, d.nodes),
            "uniform" => uniform_panels(curve, d.panels, d.panel_order)?,
            _ => Discretization::build_panelization(
                curve,
                PanelOptions {
                    panel_order: d.panel_order,
                    resolve_tol: d.resolve_tol,
                    initial_panels: d.initial_panels.unwrap_or(PanelOptions::for_curve(curve).initial_panels),
                },
            )?,
        };
        for &c in curve.corners() {
            disc = disc.dyadic_refine_corner(c, d.corner_min_len)?;
        }
        Ok(disc)
    }

    /// A panel discretization for the oracle: the configured one, or the
    /// resolution-driven default when the configured grid is trapezoidal.
    pub fn oracle_discretization(&self, curve: &Curve) -> qbx::Result<Discretization> {
        if self.discretization.kind == "trapezoidal" {
            let mut cfg = self.clone();
            cfg.discretization.kind = "panels".into();
            cfg.discretization(curve)
        } else {
            self.discretization(curve)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let e = Config::from_json(r#"{"qbx": {"p": "six"}}"#).unwrap_err();
        assert!(e.0.starts_with("qbx.p"), "{}", e.0);
        let e = Config::from_json(r#"{"study": {"ladder": [8]}}"#).unwrap_err();
        assert!(e.0.starts_with("study.ladder"), "{}", e.0);
        let e = Config::from_json(r#"{"geometry": {"colour": 1}}"#).unwrap_err();
        assert!(e.0.contains("colour"), "{}", e.0);
    }

    #[test]
    fn unknown_operator_lists_valid_names() {
        let e = Config::from_json(r#"{"operator": {"variants": ["S", "Q"]}}"#).unwrap_err();
        assert!(e.0.starts_with("operator.variants[1]") && e.0.contains("Sxx"), "{}", e.0);
    }

    #[test]
    fn named_densities() {
        let d: NamedDensity = "sin10pit".parse().unwrap();
        assert!((d.at(0.05).re - 1.0).abs() < 1e-15);
        let f: NamedDensity = "fourier:-2".parse().unwrap();
        assert!((f.at(0.125) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!("sin:x".parse::<NamedDensity>().is_err());
    }
}
