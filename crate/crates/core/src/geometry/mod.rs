//! Curves, panelizations and oversampled source grids.

mod curve;
mod discretization;
mod source_grid;

pub use curve::{Curve, Shape};
pub use discretization::{
    speed_tail_energy, trig_interp_matrix, Discretization, GridKind, Panel, PanelOptions,
    MAX_GENERATIONS,
};
pub use source_grid::SourceGrid;
