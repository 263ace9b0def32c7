use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix size mismatch: {0}")]
    SizeMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid Lie algebra model `{name}`: {reason}")]
    InvalidAlgebra { name: String, reason: String },

    #[error("`{sub}` is not contained in span of `{ambient}` (residual {residual:.3e})")]
    NotASubalgebra {
        sub: String,
        ambient: String,
        residual: f64,
    },

    #[error("group membership failed for `{group}`: residual {residual:.3e}")]
    NotInGroup { group: String, residual: f64 },

    #[error("representation model has no reference vector")]
    MissingTau0,

    #[error("unknown catalog name `{0}`")]
    UnknownCatalogName(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown coordinate x{index} on a {dim}-dimensional chart")]
    UnknownCoordinate { index: usize, dim: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("point {0:?} lies outside the chart bounds")]
    PointOutsideChart(Vec<f64>),

    #[error("group-valued field fails membership: worst residual {residual:.3e} at {point:?}")]
    FieldNotInGroup { residual: f64, point: Vec<f64> },

    #[error("field is singular at {0:?}")]
    FieldSingular(Vec<f64>),

    #[error("unsupported form degree {0}")]
    UnsupportedDegree(usize),

    #[error("deformation field leaves the normaliser: residual {residual:.3e} at {point:?}")]
    Admissibility { residual: f64, point: Vec<f64> },

    #[error("deformed connection leaves the subalgebra: residual {residual:.3e} at {point:?}")]
    CompatibilityLost { residual: f64, point: Vec<f64> },

    #[error("operation requires a centraliser-valued deformation field")]
    NotCentraliser,

    #[error("scale field must be positive: value {value:.3e} at {point:?}")]
    NonPositiveScale { value: f64, point: Vec<f64> },

    #[error("degenerate metric at {0:?}")]
    DegenerateMetric(Vec<f64>),

    #[error("{0}")]
    Invalid(String),
}
