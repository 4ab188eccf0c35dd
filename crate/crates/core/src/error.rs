use thiserror::Error;

/// Errors raised by geometry, bound aggregation, transfer and oracle code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate cell: volume {volume:e} is below tolerance")]
    DegenerateCell { volume: f64 },

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overlap volume must be positive, got {0:e}")]
    NonPositiveOverlap(f64),

    #[error("cells of the Whitney triple are not disjoint: |Q1 ∩ Q3| = {0:e}")]
    TripleNotDisjoint(f64),

    #[error("tree level count overflows at level {0}")]
    CountOverflow(usize),

    #[error("series not summable at this p: term ratio stayed >= 1 up to level {last_level}")]
    SeriesNotSummable { last_level: usize },

    #[error("map is not Lipschitz (ess sup |Dφ| unavailable)")]
    NotLipschitz,

    #[error("quasiconformality violated at sample {index}: |Dφ|^n = {lhs:e} > K|J| = {rhs:e}")]
    QuasiconformalityViolated { index: usize, lhs: f64, rhs: f64 },

    #[error("Q_{{p,q}} diverges: quadrature produced a non-finite value")]
    QuadratureDiverged,

    #[error("empty q-grid: no admissible q in [{lo}, {hi})")]
    EmptyQGrid { lo: f64, hi: f64 },

    #[error("alpha too small: s = {s} < 1")]
    AlphaTooSmall { s: f64 },

    #[error("no bound implemented: {0}")]
    NoBoundImplemented(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported mesh specification: {0}")]
    UnsupportedMeshSpec(String),

    #[error("mesh does not match bound domain: {0}")]
    MeshMismatch(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("function is constant; Rayleigh quotient undefined")]
    ConstantFunction,

    #[error("mean constraint violated: weighted |f|^(p-2) f sum is {0:e}")]
    ConstraintViolated(f64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be a finite real > 1, got {p}")))
    }
}
