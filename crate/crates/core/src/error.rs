use thiserror::Error;

use crate::algebra::Variance;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..=6")]
    UnsupportedDimension(usize),
    #[error("metric sign {0} is not +1 or -1")]
    InvalidSign(i32),
    #[error("grade {grade} exceeds dimension {dim}")]
    GradeOverflow { grade: usize, dim: usize },
    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: usize, found: usize },
    #[error("variance mismatch: {left:?} vs {right:?}")]
    VarianceMismatch { left: Variance, right: Variance },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coefficient count {found} does not match C({dim}, {grade}) = {expected}")]
    CoefficientCount {
        dim: usize,
        grade: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot contract a grade-0 tensor")]
    ContractScalar,
    #[error("degenerate simplex: |det G| = {det:e} below threshold {threshold:e}")]
    DegenerateSimplex { det: f64, threshold: f64 },
    #[error("invalid subsimplex: {0}")]
    InvalidSubsimplex(String),
    #[error("invalid edge data: {0}")]
    InvalidEdgeData(String),
    #[error("operation requires an embedded simplex")]
    NotEmbedded,
    #[error("point skipped: {0}")]
    SkippedPoint(String),
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("invalid mesh spec: {0}")]
    InvalidSpec(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("node {node} is on a temporal boundary (slice {slice})")]
    BoundaryNode { node: usize, slice: usize },
    #[error("slice {slice} system is singular (condition estimate {condition:e}, residual {residual:e})")]
    Solver {
        slice: usize,
        condition: f64,
        residual: f64,
    },
    #[error("field has {found} values but mesh has {expected} nodes")]
    FieldSize { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
