//! Quadrature by expansion: centers, local expansions, jump relations and
//! on-surface operator evaluation.

mod centers;
mod expansion;
mod jump;
mod layout;

pub use centers::{centers_for, clearance_violations, place_centers, CenterOptions, ExpansionCenter};
pub use expansion::{form_expansion, Expander, FactorScratch, ExpansionKind, LocalExpansion, SourceView, DISK_TOL};
pub use jump::{jump_matrix, jump_term};
pub use layout::{resolve_mode, Combination, Limit, QbxLayout, QbxOptions};
