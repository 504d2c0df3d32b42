//! Shared fixtures for the benchmarks.

use qbx::geometry::Curve;
use qbx::kernels::{Kernel, LimitMode, OperatorSpec, Variant};
use qbx::potential::TargetSet;
use qbx::qbx::QbxOptions;
use qbx::solve::uniform_panels;
use qbx::potential::Potential;
use qbx::Complex64;

/// Starfish panels with the density `sin(10 pi t)`.
pub fn starfish(panels: usize) -> (Potential, Vec<Complex64>, TargetSet) {
    let disc = uniform_panels(&Curve::starfish(), panels, 16).expect("valid panel count");
    let density = disc
        .t
        .iter()
        .map(|&t| Complex64::new((10.0 * std::f64::consts::PI * t).sin(), 0.0))
        .collect();
    let targets = TargetSet::on_surface(&disc, (0..disc.len()).collect()).expect("nodes in range");
    let potential = Potential::new(disc, QbxOptions::default()).expect("centers clear of the curve");
    (potential, density, targets)
}

pub fn single_layer(k: f64) -> OperatorSpec {
    OperatorSpec::new(Kernel::Helmholtz { k }, Variant::S, LimitMode::TwoSidedAverage).expect("valid operator")
}
