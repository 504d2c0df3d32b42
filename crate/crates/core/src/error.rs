use thiserror::Error;

/// Errors raised by the layer-potential toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QbxError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target and source coincide at ({x}, {y})")]
    CoincidentPoints { x: f64, y: f64 },

    #[error("target is not closer to the expansion center than the source ({target_dist} >= {source_dist})")]
    ConvergenceCondition { target_dist: f64, source_dist: f64 },

    #[error("source node {node} lies inside the expansion disk of the center at target {center} (distance {distance}, radius {radius})")]
    SourceInsideDisk {
        node: usize,
        center: usize,
        distance: f64,
        radius: f64,
    },

    #[error("target at distance {distance} lies outside the expansion disk of radius {radius}")]
    TargetOutsideDisk { distance: f64, radius: f64 },

    #[error("panel refinement exceeded {generations} generations")]
    RefinementLimit { generations: usize },

    #[error("expansion-center clearance not achieved after {rounds} refinement rounds ({violations} centers still too close)")]
    ClearanceUnachievable { rounds: usize, violations: usize },

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("adaptive quadrature did not converge within {levels} levels")]
    OracleNonConvergence { levels: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, QbxError>;
