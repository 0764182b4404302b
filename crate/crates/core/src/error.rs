use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-homogeneous input")]
    NonHomogeneousInput,
    #[error("element has degree {0}, expected 0")]
    DegreeMismatch(i32),
    #[error("composite differential is nonzero in degree {0}")]
    CompositionNonzero(usize),
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("not a Maurer-Cartan element")]
    NotMaurerCartan,
    #[error("invalid V-data: {0}")]
    InvalidVData(String),
    #[error("invalid extension: {0}")]
    InvalidExtension(String),
    #[error("pair is not a 2-cocycle")]
    NotCocycle { mc_residual: Vec<crate::scalar::Scalar>, dc_residual: Vec<crate::scalar::Scalar> },
    #[error("data is not a deformation through order {0}")]
    NotDeformation(usize),
    #[error("obstructed at order {order}")]
    Obstructed { order: usize, class: (Vec<crate::scalar::Scalar>, Vec<crate::scalar::Scalar>) },
    #[error("validation failed: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
