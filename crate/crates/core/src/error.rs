use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("quadrature degree {configured} is below the required {required}")]
    QuadratureDegree { configured: usize, required: usize },

    #[error("point ({x}, {y}) lies outside element {element}")]
    OutsideElement { element: usize, x: f64, y: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
