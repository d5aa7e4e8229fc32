use thiserror::Error;

/// Errors raised while building, loading or validating a mesh.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("degenerate rectangle: lower {lower:?}, upper {upper:?}, nx={nx}, ny={ny}")]
    DegenerateRectangle {
        lower: [f64; 2],
        upper: [f64; 2],
        nx: usize,
        ny: usize,
    },
    #[error("invalid jitter {0}: must lie in [0, 0.5)")]
    InvalidJitter(f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("inconsistent orientation: {0}")]
    Orientation(String),
    #[error("degenerate triangle {0} (zero area)")]
    DegenerateTriangle(usize),
    #[error("vertex {0} has non-finite coordinates")]
    NonFinite(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("SVD did not converge for singular value {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },
    #[error("matrix is singular: zero pivot in column {column}")]
    Singular { column: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("argument {0} outside the domain x > 0")]
    Domain(f64),
    #[error("order {0} not supported (only 0 and 1)")]
    Order(u32),
    #[error("evaluation point coincides with the source")]
    Singularity,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("evanescence strength must be >= 0, got {0}")]
    NegativeEta(f64),
    #[error("wavenumber must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("evanescence side must be +1 or -1, got {0}")]
    BadSide(i32),
    #[error("basis size must be >= 1")]
    EmptyBasis,
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Solve(#[from] crate::regsolve::SolveError),
    #[error("point ({0}, {1}) lies outside the mesh")]
    OutsideDomain(f64, f64),
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
